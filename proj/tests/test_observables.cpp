#include "doctest.h"

#include <cmath>
#include <numbers>

#include "cbs/cli_app.hpp"
#include "cbs/observables.hpp"
#include "classical_doppler.hpp"

using namespace cbs;
using doctest::Approx;

namespace {

PhysParams zero_t_example()
{
    PhysParams p;
    p.delta = 0.5;
    p.mu = 1.0;
    p.omega_R = 0.01;
    p.omega_ho = 0.01;
    return p;
}

PhysParams hot(double delta, double xi_cl_sq, double mu = 0.0, double omega_R = 1e-3)
{
    cli::ParamFlags f;
    f.delta = delta;
    f.xi_cl_sq = xi_cl_sq;
    f.mu = mu;
    f.omega_R = omega_R;
    return cli::resolve(f);
}

} // namespace

TEST_CASE("regime from the thermal state")
{
    PhysParams p;
    CHECK(regime_of(p) == Regime::zeroT);
    p.nbar = 1e-9;
    CHECK(regime_of(p) == Regime::finiteT);
    CHECK(to_string(Regime::zeroT) == "zeroT");
    CHECK(to_string(Regime::finiteT) == "finiteT");
}

TEST_CASE("no recoil: full visibility, nothing to predict")
{
    PhysParams p;
    p.delta = 0.3;
    p.mu = 0.6;
    p.nbar = 2.0;
    auto const r = full_report(p, {});
    CHECK(r.V == Approx(1.0).epsilon(1e-12));
    CHECK(r.P < 1e-12);
    CHECK(r.D_analytic == 0.0);
    CHECK(r.duality_sum == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("analytic distinguishability")
{
    auto const p = zero_t_example();
    CHECK(distinguishability_analytic(p, Regime::zeroT) == Approx(0.05657).epsilon(1e-4));
    CHECK(visibility_asymptotic(p, Regime::zeroT) == Approx(0.99840).epsilon(1e-5));

    auto const q = hot(0.5, 0.01);
    CHECK(distinguishability_analytic(q, Regime::finiteT) == Approx(0.07979).epsilon(1e-4));
    CHECK(distinguishability_analytic(hot(0.0, 0.05), Regime::finiteT) == 0.0);
    CHECK(visibility_asymptotic(hot(0.0, 0.05), Regime::finiteT)
          == Approx(0.94868).epsilon(1e-5));
    CHECK(visibility_asymptotic(hot(0.0, 1.0), Regime::finiteT) == 0.0);
}

TEST_CASE("analytic duality sum")
{
    auto const p = hot(0.0, 0.04);
    CHECK(duality_sum_analytic(p) == Approx(1 - 2 * 0.04).epsilon(1e-10));
    PhysParams cold;
    cold.delta = 0.8;
    CHECK(duality_sum_analytic(cold) == 1.0);
    // the bracket lies in (1 - 2/pi, 1]
    for (double d : {0.1, 1.0, 10.0, 1e3})
    {
        auto const q = hot(d, 0.01);
        double const bracket = (1 - duality_sum_analytic(q)) / (2 * derive(q).xi_cl_sq);
        CHECK(bracket > 1 - 2 / std::numbers::pi);
        CHECK(bracket <= 1.0);
    }
}

TEST_CASE("free atoms against the Doppler-averaged amplitudes")
{
    struct Case
    {
        double delta, xi_cl_sq, mu;
    };
    // delta = 1, mu = 0.5 once overflowed in the tensor contraction
    for (auto c : {Case{0.0, 0.01, 0.0}, Case{0.0, 0.3, 0.0}, Case{0.5, 0.1, 0.5},
                   Case{1.0, 0.05, 0.5}})
    {
        CAPTURE(c.delta);
        CAPTURE(c.xi_cl_sq);
        auto const p = hot(c.delta, c.xi_cl_sq, c.mu, 1e-6);
        auto const r = full_report(p, {});
        auto const ref = classical::traces(c.delta, derive(p).xi_sq, c.mu, 30);
        CHECK(std::isfinite(r.V));
        CHECK_FALSE(r.flags.not_converged);
        CHECK(std::abs(r.V - ref.visibility()) < 1e-5);
        CHECK(std::abs(r.P - ref.predictability()) < 1e-5);
    }
}

TEST_CASE("finite-temperature visibility at resonance")
{
    auto const r = full_report(hot(0.0, 0.05, 0.0, 1e-4), {});
    CHECK(r.regime == Regime::finiteT);
    CHECK_FALSE(r.flags.any());
    // leading order 1 - 2 xi^2; the next term is O(xi^4)
    double const xi_sq = r.derived.xi_cl_sq;
    CHECK(std::abs(r.V * r.V - (1 - 2 * xi_sq)) < 5 * xi_sq * xi_sq);
    CHECK(r.duality_sum == Approx(0.90).epsilon(0.01));
    CHECK(r.P < 1e-12);
}

TEST_CASE("zero-temperature predictability tracks rho")
{
    auto p = zero_t_example();
    for (double w : {0.01, 1e-4})
    {
        p.omega_ho = w;
        auto const d = derive(p);
        auto const pr = predictability(p, {});
        CHECK(pr.converged);
        CHECK(std::abs(pr.value - std::abs(d.rho)) <= std::max(d.chi * d.chi, d.zeta_sq));
    }
}

TEST_CASE("symmetries")
{
    auto p = zero_t_example();
    p.mu = 0.0;
    CHECK(predictability(p, {}).value == 0.0);

    p.mu = 0.7;
    auto const a = full_report(p, {});
    p.mu = -0.7;
    auto const b = full_report(p, {});
    CHECK(a.V == Approx(b.V).epsilon(1e-10));
    CHECK(a.P == Approx(b.P).epsilon(1e-8));

    // delta -> -delta conjugates the envelope but not the recoil phase, so
    // the parity is broken at first order in chi and omega_ho / |gamma|
    p.delta = -p.delta;
    auto const c = full_report(p, {});
    double const small = std::max(b.derived.chi, p.omega_ho / std::sqrt(b.derived.gamma_sq));
    CHECK(c.V != b.V);
    CHECK(std::abs(c.V - b.V) <= 20 * small * (1 - b.V));
    CHECK(std::abs(c.P - b.P) <= 20 * small * b.P);
}

TEST_CASE("visibility falls as the sample heats")
{
    double prev = 1.0;
    for (double x : {0.01, 0.05, 0.2, 1.0})
    {
        double const v = visibility(hot(0.0, x), {}).value;
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("duality inequality on a small grid")
{
    for (double delta : {0.0, 0.5, 1.5})
    {
        for (double mu : {0.0, 1.0})
        {
            auto p = zero_t_example();
            p.delta = delta;
            p.mu = mu;
            p.omega_ho = 1e-4;
            auto const r = full_report(p, {});
            CHECK(r.V * r.V + r.P * r.P <= 1 + 10 * (r.V_err + r.P_err));
        }
    }
}

TEST_CASE("regime flags")
{
    auto const f = regime_flags(hot(0.0, 0.5), Regime::finiteT);
    CHECK(f.small_xi_violated);
    CHECK(f.names() == std::vector<std::string>{"small_xi"});

    PhysParams p = zero_t_example();
    p.omega_ho = 0.2;
    auto const g = regime_flags(p, Regime::zeroT);
    CHECK(g.shallow_trap_violated);
    CHECK(g.small_xi_violated);

    p = zero_t_example();
    p.set_theta(0.5);
    CHECK(regime_flags(p, Regime::finiteT).classical_violated);
    CHECK_FALSE(regime_flags(zero_t_example(), Regime::zeroT).any());
}
