#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "dibmap/errors.hpp"
#include "dibmap/losses.hpp"
#include "dibmap/rng.hpp"

using namespace dibmap;

TEST_CASE("kl of identical gaussians is zero") {
    CHECK(kl_gaussian(0.0, 1.0, 0.0, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(kl_gaussian(-3.2, 0.4, -3.2, 0.4) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("kl closed form matches hand-computed values") {
    // KL(N(1,1) || N(0,1)) = mu^2 / 2
    CHECK(kl_gaussian(1.0, 1.0, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    // KL(N(0,4) || N(0,1)) = 0.5 (log(1/4) + 4 - 1) = 1.5 - log 2
    CHECK(kl_gaussian(0.0, 2.0, 0.0, 1.0) ==
          doctest::Approx(1.5 - std::log(2.0)).epsilon(1e-12));
    // Narrowing: KL(N(0, 1/4) || N(0,1)) = 0.5 (log 4 + 0.25 - 1)
    CHECK(kl_gaussian(0.0, 0.5, 0.0, 1.0) ==
          doctest::Approx(0.5 * (std::log(4.0) + 0.25 - 1.0)).epsilon(1e-12));
}

TEST_CASE("kl is asymmetric") {
    double fwd = kl_gaussian(0.0, 2.0, 0.0, 1.0);
    double rev = kl_gaussian(0.0, 1.0, 0.0, 2.0);
    CHECK(std::abs(fwd - rev) > 0.1);
}

TEST_CASE("closed form agrees with quadrature across a parameter sweep") {
    // Independent check: Simpson integration of p log(p/q) with no shared
    // algebra with the closed form.  Pinned tolerance 1e-6.
    const double mus[] = {-2.0, 0.0, 0.7, 1.5};
    const double sigmas[] = {0.3, 1.0, 2.7};
    for (double m0 : mus)
        for (double s0 : sigmas)
            for (double m1 : mus)
                for (double s1 : sigmas) {
                    double closed = kl_gaussian(m0, s0, m1, s1);
                    double numeric = kl_numeric(m0, s0, m1, s1);
                    INFO("m0 ", m0, " s0 ", s0, " m1 ", m1, " s1 ", s1);
                    CHECK(std::abs(closed - numeric) < 1e-6);
                }
}

TEST_CASE("quadrature with an explicit grid matches the auto grid") {
    QuadGrid g = QuadGrid::spanning(0.4, 0.8, -0.2, 1.1);
    g.validate(0.4, 0.8, -0.2, 1.1);
    double a = kl_numeric(0.4, 0.8, -0.2, 1.1, g);
    double b = kl_numeric(0.4, 0.8, -0.2, 1.1);
    CHECK(a == doctest::Approx(b).epsilon(1e-9));
}

TEST_CASE("degenerate quadrature grids are rejected") {
    QuadGrid flat{1.0, 1.0, 100};
    CHECK_THROWS_AS(flat.validate(0.0, 1.0, 0.0, 1.0), ConfigError);

    QuadGrid narrow{-2.0, 2.0, 1000};  // only 2 sigma of coverage
    CHECK_THROWS_AS(narrow.validate(0.0, 1.0, 0.0, 1.0), ConfigError);

    QuadGrid odd{-10.0, 10.0, 7};  // odd interval count breaks Simpson pairing
    CHECK_THROWS_AS(odd.validate(0.0, 1.0, 0.0, 1.0), ConfigError);

    QuadGrid coarse{-10.0, 10.0, 10};  // 2.0 spacing vs sigma 1.0
    CHECK_THROWS_AS(coarse.validate(0.0, 1.0, 0.0, 1.0), ConfigError);

    QuadGrid fine = QuadGrid::spanning(0.0, 1.0, 0.0, 1.0);
    CHECK_NOTHROW(fine.validate(0.0, 1.0, 0.0, 1.0));
}

TEST_CASE("tensor kl reduces to the sum of scalar kls") {
    Tensor mu0 = Tensor::from_vector({0.0, 1.0, -0.5});
    Tensor s0 = Tensor::from_vector({1.0, 0.5, 2.0});
    Tensor mu1 = Tensor::from_vector({0.2, 0.0, 0.0});
    Tensor s1 = Tensor::from_vector({1.0, 1.0, 0.7});
    double expect = 0.0;
    for (int i = 0; i < 3; ++i)
        expect += kl_gaussian(mu0.data()[i], s0.data()[i], mu1.data()[i], s1.data()[i]);
    CHECK(kl_gaussian(mu0, s0, mu1, s1).value() == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("tensor kl broadcasts a scalar reference") {
    Tensor mu0 = Tensor::from_vector({0.0, 1.0});
    Tensor s0 = Tensor::from_vector({1.0, 0.5});
    double expect = kl_gaussian(0.0, 1.0, 0.0, 1.0) + kl_gaussian(1.0, 0.5, 0.0, 1.0);
    Tensor got = kl_gaussian(mu0, s0, Tensor::scalar(0.0), Tensor::scalar(1.0));
    CHECK(got.value() == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("kl gradients through softplus match finite differences") {
    // The training path: sigma = softplus(rho), KL against a fixed prior.
    Tensor mu = Tensor::from_vector({0.3, -1.1, 0.8});
    Tensor rho = Tensor::from_vector({-5.0, -1.0, 0.5});
    auto loss_value = [&](Tape* t) {
        return kl_gaussian(mu, softplus(rho, t), Tensor::scalar(0.0), Tensor::scalar(1.0), t);
    };

    Tape tape;
    Tensor loss = loss_value(&tape);
    tape.backward(loss);

    const double h = 1e-5;
    for (std::size_t i = 0; i < 3; ++i) {
        for (Tensor leaf : {mu, rho}) {
            double saved = leaf.data()[i];
            leaf.data()[i] = saved + h;
            double up = loss_value(nullptr).value();
            leaf.data()[i] = saved - h;
            double down = loss_value(nullptr).value();
            leaf.data()[i] = saved;
            double fd = (up - down) / (2.0 * h);
            double analytic = leaf.grad()[i];
            double denom = std::max({std::abs(fd), std::abs(analytic), 1e-6});
            CHECK(std::abs(analytic - fd) / denom < 1e-4);
        }
    }
}

TEST_CASE("bce matches a hand computation and clamps saturated predictions") {
    Tensor pred = Tensor::from_vector({0.9, 0.2});
    Tensor target = Tensor::from_vector({1.0, 0.0});
    double expect = -0.5 * (std::log(0.9) + std::log(0.8));
    CHECK(bce_loss(pred, target).value() == doctest::Approx(expect).epsilon(1e-12));

    Tensor hard = Tensor::from_vector({0.0, 1.0});
    Tensor hard_t = Tensor::from_vector({1.0, 0.0});
    double v = bce_loss(hard, hard_t).value();
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(-std::log(1e-7)).epsilon(1e-6));
}

TEST_CASE("bce gradient oracle") {
    Tensor pred = Tensor::from_vector({0.3, 0.6, 0.85});
    Tensor target = Tensor::from_vector({0.0, 1.0, 1.0});
    Tape tape;
    Tensor loss = bce_loss(pred, target, &tape);
    tape.backward(loss);
    const double h = 1e-5;
    for (std::size_t i = 0; i < 3; ++i) {
        double saved = pred.data()[i];
        pred.data()[i] = saved + h;
        double up = bce_loss(pred, target).value();
        pred.data()[i] = saved - h;
        double down = bce_loss(pred, target).value();
        pred.data()[i] = saved;
        double fd = (up - down) / (2.0 * h);
        CHECK(std::abs(pred.grad()[i] - fd) / std::max(std::abs(fd), 1e-6) < 1e-4);
    }
}

TEST_CASE("mse matches a hand computation") {
    Tensor pred = Tensor::from_vector({1.0, 2.0, 5.0});
    Tensor target = Tensor::from_vector({0.0, 2.0, 3.0});
    CHECK(mse_loss(pred, target).value() == doctest::Approx((1.0 + 0.0 + 4.0) / 3.0));
    CHECK(base_loss(BaseLoss::mse, pred, target).value() ==
          doctest::Approx(mse_loss(pred, target).value()));
    CHECK(base_loss(BaseLoss::bce, Tensor::from_vector({0.5}), Tensor::from_vector({1.0})).value() ==
          doctest::Approx(-std::log(0.5)));
}

TEST_CASE("total loss is base plus weighted kl") {
    LossConfig cfg;
    cfg.kl_weight = 0.25;
    CHECK(total_loss(2.0, 4.0, cfg) == doctest::Approx(3.0));
    cfg.kl_weight = 0.0;
    CHECK(total_loss(2.0, 4.0, cfg) == doctest::Approx(2.0));
}

TEST_CASE("meaningfully negative kl is rejected") {
    LossConfig cfg;
    CHECK_THROWS_AS(total_loss(1.0, -0.5, cfg), NumericalError);
    // Tiny negative values from float cancellation are treated as zero.
    CHECK(total_loss(1.0, -1e-13, cfg) == doctest::Approx(1.0));
}

TEST_CASE("sigma/rho parameterization round-trips") {
    for (double rho : {-6.0, -2.0, 0.0, 1.5, 40.0}) {
        double sigma = sigma_from_rho(rho);
        CHECK(sigma > 0.0);
        CHECK(rho_from_sigma(sigma) == doctest::Approx(rho).epsilon(1e-9));
    }
    CHECK(sigma_from_rho(-5.0) == doctest::Approx(std::log1p(std::exp(-5.0))).epsilon(1e-12));
}

TEST_CASE("l2_reg sums squared deviations") {
    Tensor p = Tensor::from_vector({1.0, 2.0, 3.0});
    Tensor t = Tensor::from_vector({0.0, 2.0, 5.0});
    CHECK(l2_reg(p, t).value() == doctest::Approx(1.0 + 0.0 + 4.0));

    Tape tape;
    Tensor loss = l2_reg(p, t, &tape);
    tape.backward(loss);
    CHECK(p.grad()[0] == doctest::Approx(2.0));
    CHECK(p.grad()[1] == doctest::Approx(0.0));
    CHECK(p.grad()[2] == doctest::Approx(-4.0));
}
