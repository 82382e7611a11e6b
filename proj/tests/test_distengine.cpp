#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hoidist/distengine.hpp"
#include "hoidist/numcore/gradcheck.hpp"

using namespace distengine;
using numcore::ParamStore;
using numcore::Rng;
using numcore::Shape;
using numcore::Tensor;

namespace {

Tensor random_block(Rng& rng, const Shape& shape, bool rg = false) {
    Tensor t = Tensor::zeros(shape, rg);
    for (auto& v : t.mutable_data())
        v = rng.uniform() * 4.0 - 2.0;
    return t;
}

DistributionSpace space_from(Tensor mu, Tensor sigma, double gamma, int n_s) {
    DistributionSpace s;
    s.kind = promptspace::GroupKind::object;
    s.mu = mu;
    s.sigma = sigma;
    s.gamma = Tensor::scalar(gamma);
    s.N_s = n_s;
    return s;
}

}  // namespace

TEST_CASE("estimate: trivia and brute-force oracle") {
    // per-element values {0, 2}: mu = 1, population sigma = 1
    Tensor two = Tensor::from_data({2, 1, 2}, {0.0, 0.0, 2.0, 2.0});
    auto d = estimate(two);
    CHECK(d.mu.data() == std::vector<double>{1.0, 1.0});
    CHECK(d.sigma.data() == std::vector<double>{1.0, 1.0});

    // constant block: sigma exactly zero
    auto dc = estimate(Tensor::full({4, 2, 3}, 5.5));
    for (double v : dc.sigma.data())
        CHECK(v == 0.0);

    // random K=8 block vs brute force
    Rng rng(7);
    Tensor block = random_block(rng, {8, 3, 4});
    auto dr = estimate(block);
    for (int t = 0; t < 3; ++t)
        for (int j = 0; j < 4; ++j) {
            double m = 0.0;
            for (int k = 0; k < 8; ++k)
                m += block.at({k, t, j});
            m /= 8.0;
            double var = 0.0;
            for (int k = 0; k < 8; ++k) {
                const double dlt = block.at({k, t, j}) - m;
                var += dlt * dlt;
            }
            var /= 8.0;
            CHECK(dr.mu.at({t, j}) == doctest::Approx(m).epsilon(1e-12));
            CHECK(dr.sigma.at({t, j}) == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
        }
}

TEST_CASE("estimate rejects K < 2") {
    CHECK_THROWS_AS(estimate(Tensor::zeros({1, 2, 2})), hoidist::ConfigError);
}

TEST_CASE("sigma of estimated distributions is nonnegative") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor block = random_block(rng, {4, 2, 5});
        auto d = estimate(block);
        for (double v : d.sigma.data())
            CHECK(v >= 0.0);
    }
}

TEST_CASE("aggregate: identity, uniform, and matmul oracle") {
    Rng rng(3);
    Tensor blocks = random_block(rng, {3, 2, 2, 2});

    Tensor eye = Tensor::zeros({3, 3});
    for (int i = 0; i < 3; ++i)
        eye.mutable_data()[i * 3 + i] = 1.0;
    Tensor same = aggregate(blocks, eye);
    CHECK(same.data() == blocks.data());

    Tensor uni = Tensor::full({1, 3}, 1.0 / 3.0);
    Tensor mean_block = aggregate(blocks, uni);
    for (int i = 0; i < 8; ++i) {
        double acc = 0.0;
        for (int n = 0; n < 3; ++n)
            acc += blocks.data()[n * 8 + i];
        CHECK(mean_block.data()[i] == doctest::Approx(acc / 3.0).epsilon(1e-12));
    }

    Tensor w = random_block(rng, {5, 3});
    Tensor out = aggregate(blocks, w);
    CHECK(out.shape() == Shape{5, 2, 2, 2});
    for (int np = 0; np < 5; ++np)
        for (int i = 0; i < 8; ++i) {
            double acc = 0.0;
            for (int n = 0; n < 3; ++n)
                acc += w.at({np, n}) * blocks.data()[n * 8 + i];
            CHECK(out.data()[np * 8 + i] == doctest::Approx(acc).epsilon(1e-12));
        }

    CHECK_THROWS_AS(aggregate(blocks, Tensor::zeros({5, 4})), hoidist::ContractViolation);
}

TEST_CASE("estimate-after-identity-aggregation equals plain estimate") {
    Rng rng(5);
    Tensor blocks = random_block(rng, {4, 3, 2, 2});
    Tensor eye = Tensor::zeros({4, 4});
    for (int i = 0; i < 4; ++i)
        eye.mutable_data()[i * 4 + i] = 1.0;
    auto [mu_a, sigma_a] = estimate_stack(aggregate(blocks, eye));
    auto [mu_b, sigma_b] = estimate_stack(blocks);
    CHECK(mu_a.data() == mu_b.data());
    CHECK(sigma_a.data() == sigma_b.data());
}

TEST_CASE("sampling trivia: gamma=0 annihilates noise; formula arithmetic") {
    Rng rng(9);
    auto s0 = space_from(Tensor::full({2, 2, 2}, 1.5), Tensor::full({2, 2, 2}, 0.7), 0.0, 3);
    Rng r1(1);
    auto g = sample(s0, SampleStrategy::reparam_gamma, r1);
    CHECK(g.raw.shape() == Shape{2, 3, 2, 2});
    for (double v : g.raw.data())
        CHECK(v == 1.5);

    // mu=1.0, sigma=0.5, gamma=0.01, frozen n=2.0 -> 1.01
    Tensor mu = Tensor::full({1, 1, 1}, 1.0);
    Tensor sigma = Tensor::full({1, 1, 1}, 0.5);
    Tensor gamma = Tensor::scalar(0.01);
    Tensor noise = Tensor::full({1, 1, 1, 1}, 2.0);
    Tensor raw = numcore::add(numcore::reshape(mu, {1, 1, 1, 1}),
                              numcore::mul(numcore::mul(numcore::abs(gamma), noise),
                                           numcore::reshape(sigma, {1, 1, 1, 1})));
    CHECK(raw.item() == doctest::Approx(1.01).epsilon(1e-15));
}

TEST_CASE("gamma=0 reparam draws are bitwise equal to repeat-mu") {
    Rng rng(21);
    Tensor mu = random_block(rng, {3, 2, 4});
    Tensor sigma = random_block(rng, {3, 2, 4});
    for (auto& v : sigma.mutable_data())
        v = std::fabs(v);
    auto s = space_from(mu, sigma, 0.0, 2);
    Rng ra(5), rb(5);
    auto a = sample(s, SampleStrategy::reparam_gamma, ra);
    auto b = sample(s, SampleStrategy::repeat_mu, rb);
    CHECK(a.raw.data() == b.raw.data());
    CHECK(a.pooled.data() == b.pooled.data());
}

TEST_CASE("sampling statistics: std within 2% of gamma*sigma, mean within 3*gamma*sigma/sqrt(n)") {
    const double gamma = 0.01;
    Tensor mu = Tensor::from_data({1, 1, 2}, {0.4, -1.2});
    Tensor sigma = Tensor::from_data({1, 1, 2}, {0.8, 2.0});
    auto s = space_from(mu, sigma, gamma, 1);
    Rng rng(42);
    const int n = 10'000;
    std::vector<double> acc(2, 0.0), acc2(2, 0.0);
    for (int i = 0; i < n; ++i) {
        auto g = sample(s, SampleStrategy::reparam_gamma, rng);
        for (int j = 0; j < 2; ++j) {
            const double v = g.raw.data()[j];
            acc[j] += v;
            acc2[j] += v * v;
        }
    }
    for (int j = 0; j < 2; ++j) {
        const double m = acc[j] / n;
        const double sd = std::sqrt(acc2[j] / n - m * m);
        const double target_sd = gamma * sigma.data()[j];
        CHECK(std::fabs(sd - target_sd) < 0.02 * target_sd);
        CHECK(std::fabs(m - mu.data()[j]) < 3.0 * target_sd / std::sqrt(double(n)));
    }
}

TEST_CASE("vae strategy is reparam with unit noise scale") {
    Rng rng(33);
    Tensor mu = random_block(rng, {2, 2, 2});
    Tensor sigma = random_block(rng, {2, 2, 2});
    for (auto& v : sigma.mutable_data())
        v = std::fabs(v);
    auto s = space_from(mu, sigma, 123.0, 2);  // gamma value must be ignored
    Rng ra(8), rb(8);
    auto vae = sample(s, SampleStrategy::reparam_vae, ra);
    Tensor noise = numcore::gaussian(rb, {2, 2, 2, 2});
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k)
            for (int t = 0; t < 2; ++t)
                for (int j = 0; j < 2; ++j) {
                    const double expected = mu.at({i, t, j}) + noise.at({i, k, t, j}) * sigma.at({i, t, j});
                    CHECK(vae.raw.at({i, k, t, j}) == doctest::Approx(expected).epsilon(1e-15));
                }
}

TEST_CASE("naive strategy max-pools the aggregated block") {
    Rng rng(13);
    DistributionSpace s;
    s.kind = promptspace::GroupKind::object;
    s.aggregated = random_block(rng, {2, 3, 2, 2});
    auto [mu, sigma] = estimate_stack(s.aggregated);
    s.mu = mu;
    s.sigma = sigma;
    s.gamma = Tensor::scalar(0.01);
    s.N_s = 2;
    Rng r(1);
    auto g = sample(s, SampleStrategy::naive_maxpool, r);
    for (int np = 0; np < 2; ++np)
        for (int t = 0; t < 2; ++t)
            for (int j = 0; j < 2; ++j) {
                double mx = -1e300;
                for (int k = 0; k < 3; ++k)
                    mx = std::max(mx, s.aggregated.at({np, k, t, j}));
                CHECK(g.raw.at({np, 0, t, j}) == mx);
                CHECK(g.raw.at({np, 1, t, j}) == mx);
            }
}

TEST_CASE("empirical mean of reparam samples converges to mu") {
    Rng rng(17);
    Tensor mu = random_block(rng, {1, 1, 4});
    Tensor sigma = Tensor::full({1, 1, 4}, 1.3);
    auto s = space_from(mu, sigma, 0.05, 1);
    Rng draw(99);
    const int n = 40'000;
    std::vector<double> acc(4, 0.0);
    for (int i = 0; i < n; ++i) {
        auto g = sample(s, SampleStrategy::reparam_gamma, draw);
        for (int j = 0; j < 4; ++j)
            acc[j] += g.raw.data()[j];
    }
    for (int j = 0; j < 4; ++j)
        CHECK(std::fabs(acc[j] / n - mu.data()[j]) <= 3.0 * 0.05 * 1.3 / std::sqrt(double(n)));
}

TEST_CASE("pooled equals token-mean of raw") {
    Rng rng(51);
    Tensor mu = random_block(rng, {3, 5, 4});
    Tensor sigma = random_block(rng, {3, 5, 4});
    for (auto& v : sigma.mutable_data())
        v = std::fabs(v);
    auto s = space_from(mu, sigma, 0.3, 2);
    Rng r(2);
    auto g = sample(s, SampleStrategy::reparam_gamma, r);
    for (int np = 0; np < 3; ++np)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 4; ++j) {
                double acc = 0.0;
                for (int t = 0; t < 5; ++t)
                    acc += g.raw.at({np, i, t, j});
                CHECK(g.pooled.at({np, i, j}) == doctest::Approx(acc / 5.0).epsilon(1e-12));
            }
}

TEST_CASE("fourier guidance: DC only for constant tokens, frequency-1 energy for cosine") {
    DistributionSpace s;
    s.kind = promptspace::GroupKind::object;
    const int L = 8;
    // one category, K=2, constant over tokens
    Tensor blocks = Tensor::zeros({1, 2, L, 1});
    for (auto& v : blocks.mutable_data())
        v = 3.0;
    s.aggregated = blocks;
    auto [mu1, sg1] = estimate_stack(blocks);
    s.mu = mu1;
    s.sigma = sg1;
    s.gamma = Tensor::scalar(0.0);
    s.N_s = 5;
    auto g = fourier_guidance(s);
    CHECK(g.pooled.at({0, 0, 0}) == doctest::Approx(3.0).epsilon(1e-12));
    for (int i = 1; i < 5; ++i)
        CHECK(g.pooled.at({0, i, 0}) == doctest::Approx(0.0).epsilon(1e-12));

    // pure cosine at frequency 1
    Tensor cosblk = Tensor::zeros({1, 2, L, 1});
    for (int k = 0; k < 2; ++k)
        for (int t = 0; t < L; ++t)
            cosblk.mutable_data()[k * L + t] = std::cos(2.0 * M_PI * t / L);
    DistributionSpace s2 = s;
    s2.aggregated = cosblk;
    auto g2 = fourier_guidance(s2);
    CHECK(std::fabs(g2.pooled.at({0, 1, 0})) > 0.4);  // Re X[1] = 1/2
    CHECK(g2.pooled.at({0, 0, 0}) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(g2.pooled.at({0, 2, 0}) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("fourier guidance matches a naive O(L^2) DFT oracle") {
    Rng rng(77);
    const int L = 6, e = 3, n_prime = 2, K = 2;
    DistributionSpace s;
    s.kind = promptspace::GroupKind::interaction;
    s.aggregated = random_block(rng, {n_prime, K, L, e});
    auto [mu, sg] = estimate_stack(s.aggregated);
    s.mu = mu;
    s.sigma = sg;
    s.gamma = Tensor::scalar(0.0);
    s.N_s = L;  // all components
    auto g = fourier_guidance(s);

    for (int np = 0; np < n_prime; ++np)
        for (int c = 0; c < e; ++c) {
            // K-pooled signal
            std::vector<double> x(L, 0.0);
            for (int t = 0; t < L; ++t) {
                for (int k = 0; k < K; ++k)
                    x[t] += s.aggregated.at({np, k, t, c});
                x[t] /= K;
            }
            // naive DFT, normalised by 1/L
            std::vector<double> re(L, 0.0), im(L, 0.0);
            for (int f = 0; f < L; ++f)
                for (int t = 0; t < L; ++t) {
                    const double ang = 2.0 * M_PI * f * t / L;
                    re[f] += x[t] * std::cos(ang) / L;
                    im[f] -= x[t] * std::sin(ang) / L;
                }
            // component order: Re 0..L/2, Im 1..ceil(L/2)-1
            std::vector<double> expected;
            for (int f = 0; f <= L / 2; ++f)
                expected.push_back(re[f]);
            for (int f = 1; f < (L + 1) / 2; ++f)
                expected.push_back(im[f]);
            for (int i = 0; i < L; ++i)
                CHECK(g.pooled.at({np, i, c}) == doctest::Approx(expected[i]).epsilon(1e-10));
        }
}

TEST_CASE("gradients flow through the sampling path: dS/dmu=1, dS/dsigma=gamma*n, dS/dgamma=sum(n*sigma)") {
    Rng rng(4);
    Tensor mu = random_block(rng, {2, 2, 2}, true);
    Tensor sigma = random_block(rng, {2, 2, 2}, true);
    for (auto& v : sigma.mutable_data())
        v = std::fabs(v) + 0.5;
    Tensor gamma = Tensor::scalar(0.01, true);
    Rng frozen(1234);
    Tensor noise = numcore::gaussian(frozen, {2, 3, 2, 2});

    auto f = [&]() {
        Tensor mu1 = numcore::reshape(mu, {2, 1, 2, 2});
        Tensor sigma1 = numcore::reshape(sigma, {2, 1, 2, 2});
        Tensor raw = numcore::add(mu1, numcore::mul(numcore::mul(numcore::abs(gamma), noise), sigma1));
        return numcore::sum(raw);
    };
    auto report = numcore::gradcheck(f, {{"mu", mu}, {"sigma", sigma}, {"gamma", gamma}}, 1e-5);
    CHECK(report.pass);

    // closed-form checks on the analytic gradients
    mu.raw()->grad.clear();
    sigma.raw()->grad.clear();
    gamma.raw()->grad.clear();
    numcore::backward(f());
    for (double gv : mu.grad())
        CHECK(gv == doctest::Approx(3.0).epsilon(1e-12));  // summed over N_s=3 samples
    double expected_gamma_grad = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 3; ++k)
            for (int t = 0; t < 2; ++t)
                for (int j = 0; j < 2; ++j)
                    expected_gamma_grad += noise.at({i, k, t, j}) * sigma.at({i, t, j});
    CHECK(gamma.grad()[0] == doctest::Approx(expected_gamma_grad).epsilon(1e-10));
}

TEST_CASE("full space path gradcheck: estimate -> aggregate -> sample") {
    Rng rng(6);
    Tensor blocks = random_block(rng, {3, 4, 2, 3}, true);
    Tensor w = random_block(rng, {2, 3}, true);
    Tensor gamma = Tensor::scalar(0.02, true);
    Rng frozen(55);
    Tensor noise = numcore::gaussian(frozen, {2, 2, 2, 3});
    auto f = [&]() {
        Tensor agg = aggregate(blocks, w);
        auto [mu, sigma] = estimate_stack(agg);
        Tensor mu1 = numcore::reshape(mu, {2, 1, 2, 3});
        Tensor sigma1 = numcore::reshape(sigma, {2, 1, 2, 3});
        Tensor raw = numcore::add(mu1, numcore::mul(numcore::mul(numcore::abs(gamma), noise), sigma1));
        Tensor pooled = numcore::mean(raw, 2, false);
        return numcore::mean(numcore::mul(pooled, pooled));
    };
    auto report = numcore::gradcheck(f, {{"blocks", blocks}, {"w", w}, {"gamma", gamma}}, 1e-5);
    CHECK(report.pass);
}

TEST_CASE("strategy and basis parsing") {
    CHECK(parse_strategy("reparam_gamma") == SampleStrategy::reparam_gamma);
    CHECK(parse_basis("fourier") == SpaceBasis::fourier);
    CHECK_THROWS_AS(parse_strategy("bogus"), hoidist::ConfigError);
    CHECK_THROWS_AS(parse_basis("bogus"), hoidist::ConfigError);
}

TEST_CASE("fourier guidance rejects N_s > L") {
    DistributionSpace s;
    s.kind = promptspace::GroupKind::object;
    s.aggregated = Tensor::zeros({1, 2, 4, 2});
    auto [mu, sg] = estimate_stack(s.aggregated);
    s.mu = mu;
    s.sigma = sg;
    s.gamma = Tensor::scalar(0.0);
    s.N_s = 5;
    CHECK_THROWS_AS(fourier_guidance(s), hoidist::ContractViolation);
}
