#pragma once

#include <map>
#include <string>
#include <vector>

#include "hoidist/numcore/param_store.hpp"

namespace harness {

// Adaptive moments with decoupled weight decay. Elements frozen by a
// parameter mask are never touched, neither by the gradient step nor by the
// decay term.
class AdamW {
  public:
    AdamW(numcore::ParamStore& store, double lr, double beta1 = 0.9, double beta2 = 0.999,
          double eps = 1e-8, double weight_decay = 1e-4);

    void set_lr(double lr) { lr_ = lr; }
    double lr() const { return lr_; }

    void step();

  private:
    numcore::ParamStore& store_;
    double lr_, beta1_, beta2_, eps_, weight_decay_;
    int64_t t_ = 0;
    std::map<std::string, std::vector<double>> m_, v_;
};

}  // namespace harness
