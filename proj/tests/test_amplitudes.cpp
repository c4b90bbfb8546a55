#include "doctest.h"

#include <cmath>
#include <random>

#include "cbs/amplitudes.hpp"
#include "cbs/fock_oracle.hpp"

using namespace cbs;
using doctest::Approx;
using cplx = std::complex<double>;

namespace {

Wavevector const khat{1, 0};
Wavevector const nhat{0, 1};

cplx envelope(PhysParams const& p, double s, double t, double sp, double tp)
{
    cplx const i(0.0, 1.0);
    auto const g = p.gamma();
    return std::exp(i * g * (s + t) - i * std::conj(g) * (sp + tp));
}

PhysParams sample_params()
{
    PhysParams p;
    p.delta = 0.6;
    p.omega_R = 0.02;
    p.omega_ho = 0.01;
    p.nbar = 0.8;
    p.mu = 0.45;
    return p;
}

} // namespace

TEST_CASE("transition operator bookkeeping")
{
    auto const a = events_T(Path::A, 1.5, 0.25);
    REQUIRE(a.size() == 4);
    CHECK(a[0] == Event{2, khat, 0.0});
    CHECK(a[1] == Event{2, nhat, -1.5});
    CHECK(a[2] == Event{1, -nhat, -1.5});
    CHECK(a[3] == Event{1, khat, -1.75});
    CHECK(a.total_q(1) == Wavevector{1, -1});
    CHECK(a.total_q(2) == Wavevector{1, 1});
    CHECK_FALSE(a.neutral());

    // swapping the atoms and reversing nhat leaves the per-atom totals alone
    auto const b = events_T(Path::B, 1.5, 0.25);
    CHECK(b[0] == Event{1, khat, 0.0});
    CHECK(b[3] == Event{2, khat, -1.75});
    CHECK(b.total_q(1) == Wavevector{1, -1});
    CHECK(b.total_q(2) == Wavevector{1, 1});

    CHECK_THROWS_AS(events_T(Path::A, -0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(events_T(Path::B, 1.0, -0.1), std::invalid_argument);
}

TEST_CASE("adjoint reversal")
{
    CHECK(adjoint_reversed(EventList{}).empty());
    EventList one{{1, khat, -3.0}};
    CHECK(adjoint_reversed(one) == EventList{{1, -khat, -3.0}});

    auto const a = events_T(Path::A, 0.3, 2.0);
    CHECK(adjoint_reversed(adjoint_reversed(a)) == a);
    auto const r = adjoint_reversed(a);
    CHECK(r[0] == Event{1, -khat, -2.3});
    CHECK(r[3] == Event{2, -khat, 0.0});
}

TEST_CASE("trace products are per-atom neutral")
{
    auto const a = events_T(Path::A, 0.4, 1.1);
    auto const b = events_T(Path::B, 0.9, 0.2);
    CHECK((adjoint_reversed(a) + a).neutral());
    CHECK((adjoint_reversed(events_T(Path::A, 2.0, 3.0)) + b).neutral());
    for (auto kind : {TraceKind::I_A, TraceKind::I_B, TraceKind::INT})
        CHECK(trace_events(kind, 0.1, 0.2, 0.3, 0.4).neutral());
}

TEST_CASE("no recoil: integrand is the bare envelope")
{
    auto p = sample_params();
    p.omega_R = 0.0;
    for (auto kind : {TraceKind::I_A, TraceKind::I_B, TraceKind::INT})
    {
        auto const v = trace_integrand(kind, 0.3, 1.7, 2.2, 0.05, p);
        CHECK(std::abs(v - envelope(p, 0.3, 1.7, 2.2, 0.05)) < 1e-15);
    }
}

TEST_CASE("INT integrand against the Fock-space oracle")
{
    PhysParams p;
    p.delta = 0.0;
    p.omega_R = 0.01;
    p.omega_ho = 1e-4;
    p.nbar = 0.0;
    p.mu = 0.0;
    auto const ev = trace_events(TraceKind::INT, 1, 1, 1, 1);
    auto const oracle = oracle_correlator(ev, p);
    CHECK_FALSE(oracle.truncation_flag);
    auto const expected = envelope(p, 1, 1, 1, 1) * oracle.value;
    auto const v = trace_integrand(TraceKind::INT, 1, 1, 1, 1, p);
    CHECK(std::abs(v - expected) / std::abs(expected) < 1e-8);
}

TEST_CASE("way B is way A with nhat reversed")
{
    auto p = sample_params();
    auto q = p;
    q.mu = -p.mu;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(0.0, 5.0);
    for (int k = 0; k < 20; ++k)
    {
        double const s = uni(rng), t = uni(rng), sp = uni(rng), tp = uni(rng);
        auto const b = trace_integrand(TraceKind::I_B, s, t, sp, tp, p);
        auto const a = trace_integrand(TraceKind::I_A, s, t, sp, tp, q);
        CHECK(std::abs(a - b) < 1e-14);
    }
    p.mu = 0.0;
    CHECK(trace_integrand(TraceKind::I_A, 1, 2, 3, 4, p)
          == trace_integrand(TraceKind::I_B, 1, 2, 3, 4, p));
}

TEST_CASE("conjugation symmetry")
{
    auto const p = sample_params();
    double const s = 0.7, t = 2.5, sp = 1.9, tp = 0.1;
    for (auto kind : {TraceKind::I_A, TraceKind::I_B})
    {
        auto const x = trace_integrand(kind, s, t, sp, tp, p);
        auto const y = trace_integrand(kind, sp, tp, s, t, p);
        CHECK(std::abs(x - std::conj(y)) < 1e-15);
    }
    // INT swaps into the (B, A) variant
    auto const swapped = adjoint_reversed(events_T(Path::B, sp, tp))
                         + events_T(Path::A, s, t);
    auto const ba = envelope(p, s, t, sp, tp) * correlator(swapped, p);
    auto const y = trace_integrand(TraceKind::INT, sp, tp, s, t, p);
    CHECK(std::abs(ba - std::conj(y)) < 1e-15);
}

TEST_CASE("structured integrand reproduces the generic one")
{
    auto const p = sample_params();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(0.0, 6.0);
    for (auto kind : {TraceKind::I_A, TraceKind::I_B, TraceKind::INT})
    {
        TraceIntegrand f(kind, p);
        for (int k = 0; k < 10; ++k)
        {
            quad::Point4 x{uni(rng), uni(rng), uni(rng), uni(rng)};
            auto const expected = trace_integrand(kind, x[0], x[1], x[2], x[3], p);
            CHECK(std::abs(f(x) - expected) < 1e-14);
        }
    }
}

TEST_CASE("ordered regions map into the original variables")
{
    auto const p = sample_params();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(0.0, 4.0);
    for (auto const& m : ordered_regions())
    {
        for (auto kind : {TraceKind::I_A, TraceKind::I_B})
        {
            TraceIntegrand f(kind, p, m);
            CHECK_FALSE(f.swap_conjugate());
            for (int k = 0; k < 10; ++k)
            {
                quad::Point4 y{uni(rng), uni(rng), uni(rng), uni(rng)};
                quad::Point4 x{};
                for (int r = 0; r < 4; ++r)
                    for (int c = 0; c < 4; ++c)
                        x[r] += m[r][c] * y[c];
                auto const expected
                    = trace_integrand(kind, x[0], x[1], x[2], x[3], p);
                CHECK(std::abs(f(y) - expected) < 1e-14);
            }
        }
    }
    // the two regions cover s >= s'; the rest follows by conjugation
    auto const& both = ordered_regions()[0];
    auto const& mixed = ordered_regions()[1];
    CHECK(both[0] == std::array<int, 4>{1, 1, 0, 0});
    CHECK(both[2] == std::array<int, 4>{1, 0, 0, 0});
    CHECK(mixed[1] == std::array<int, 4>{0, 0, 1, 0});
    CHECK(mixed[3] == std::array<int, 4>{0, 0, 1, 1});
}

TEST_CASE("fast tensor contraction equals the pointwise one")
{
    auto const p = sample_params();
    for (auto kind : {TraceKind::I_A, TraceKind::INT})
    {
        TraceIntegrand f(kind, p);
        auto const rates = f.rates();
        std::array<quad::Rule1d, 4> rules;
        std::array<quad::Rule1d const*, 4> ptr{};
        for (int a = 0; a < 4; ++a)
        {
            rules[a] = quad::envelope_rule(10, rates[a]);
            ptr[a] = &rules[a];
        }
        auto const fast = f.tensor_contract(ptr, false, 1);
        auto const slow = f.quad::Integrand4d::tensor_contract(ptr, false, 1);
        CHECK(std::abs(fast - slow) < 1e-12 * std::abs(slow));
    }
}

TEST_CASE("trace kinds have names")
{
    CHECK(to_string(TraceKind::I_A) == "I_A");
    CHECK(to_string(TraceKind::I_B) == "I_B");
    CHECK(to_string(TraceKind::INT) == "INT");
}
