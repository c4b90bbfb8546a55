// Acceptance checks. Each criterion prints one PASS/FAIL line; indented
// lines underneath carry the measured numbers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cbs/amplitudes.hpp"
#include "cbs/cli_app.hpp"
#include "cbs/correlator.hpp"
#include "cbs/fock_oracle.hpp"
#include "cbs/observables.hpp"
#include "cbs/quadrature.hpp"

using namespace cbs;

namespace {

// pinned tolerances
constexpr double kLawXi4 = 3.0;          // criteria 1, 4, 7: coefficient of xi^4
constexpr double kLawErr = 5.0;          // criteria 1, 4, 7: multiple of quadrature error
constexpr double kSaturationC = 10.0;    // criterion 2
constexpr double kSlope = -2.0;          // criterion 4
constexpr double kSlopeTol = 0.1;        // criterion 4
constexpr double kOracleRel = 1e-8;      // criterion 5
constexpr int kOracleCases = 200;        // criterion 5
constexpr double kDistRel = 0.01;        // criterion 6
constexpr int kDistDim = 400;            // criterion 6
constexpr double kInequalityErr = 10.0;  // criterion 7
constexpr double kSeparableRel = 1e-10;  // criterion 8
constexpr double kErrorBars = 3.0;       // criterion 8: combined bars, in sigma
constexpr int kMcPoints = 10;            // criterion 8

struct Outcome
{
    bool pass = false;
    std::string summary;
    std::vector<std::string> lines;
};

std::string fmt(char const* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double v_sq_err(DualityReport const& r)
{
    return 2 * r.V * r.V_err;
}

PhysParams cold(double delta, double chi, double mu)
{
    PhysParams p;
    p.delta = delta;
    p.mu = mu;
    p.omega_ho = 1e-4;
    p.omega_R = chi * std::sqrt(delta * delta + 0.25);
    return p;
}

std::vector<double> const kSaturationDeltas{0.0, 0.25, 0.5, 1.0, 2.0};
std::vector<double> const kSaturationChis{0.01, 0.02, 0.05};

//---------------------------------------------------------------------------//

Outcome criterion1()
{
    Outcome o;
    double const theta = 0.01, omega_R = 1e-3;
    double worst = 0.0;
    for (double xs : {0.01, 0.02, 0.05})
    {
        double const w = omega_ho_for_xi_cl_sq(0.0, omega_R, theta, xs);
        auto const p = PhysParams::from_theta(0.0, w, omega_R, theta, 0.0);
        auto const r = full_report(p, {});
        double const dev = std::abs(r.V * r.V - (1 - 2 * xs));
        double const bound = kLawXi4 * xs * xs + kLawErr * v_sq_err(r);
        worst = std::max(worst, dev / bound);
        o.lines.push_back(fmt("xi_cl^2=%.2f V=%.10f |V^2-(1-2xi^2)|=%.3e bound=%.3e "
                              "(V^2-1+2xi^2)/xi^4=%.3f",
                              xs, r.V, dev, bound, (r.V * r.V - 1 + 2 * xs) / (xs * xs)));
    }
    o.pass = worst <= 1.0;
    o.summary = fmt("low-temperature visibility law: max deviation/bound=%.3f limit=1", worst);
    return o;
}

Outcome criterion2()
{
    Outcome o;
    double c_fit = 0.0;
    for (double mu : {0.0, 1.0})
        for (double delta : kSaturationDeltas)
            for (double chi : kSaturationChis)
            {
                auto const p = cold(delta, chi, mu);
                auto const r = full_report(p, {});
                auto const& d = r.derived;
                double const dev
                    = std::abs((1 - r.V * r.V) - (d.rho * d.rho + 2 * d.zeta_sq));
                double const scale = std::max({d.zeta_sq * d.zeta_sq, std::pow(d.chi, 3),
                                               d.zeta_sq * d.chi});
                double const c = dev / scale;
                c_fit = std::max(c_fit, c);
                o.lines.push_back(fmt("mu=%g delta=%.2f chi=%.2f zeta=%.2e "
                                      "1-V^2=%.6e rho^2+2zeta^2=%.6e c=%.2f",
                                      mu, delta, chi, std::sqrt(d.zeta_sq),
                                      1 - r.V * r.V, d.rho * d.rho + 2 * d.zeta_sq, c));
            }
    o.pass = c_fit <= kSaturationC;
    o.summary = fmt("zero-T duality saturation: fitted c=%.2f limit=%.0f", c_fit, kSaturationC);
    return o;
}

Outcome criterion3()
{
    Outcome o;
    double worst_rho = 0.0, worst_mu0 = 0.0, worst_d0 = 0.0;
    for (double mu : {0.0, 1.0})
        for (double delta : kSaturationDeltas)
            for (double chi : kSaturationChis)
            {
                auto const p = cold(delta, chi, mu);
                auto const d = derive(p);
                auto const pr = predictability(p, {});
                double const a = std::abs(pr.value - std::abs(d.rho))
                                 / std::max(d.chi * d.chi, d.zeta_sq);
                worst_rho = std::max(worst_rho, a);
                if (mu == 0.0)
                    worst_mu0 = std::max(worst_mu0, pr.value - pr.error);
                if (delta == 0.0)
                    worst_d0 = std::max(worst_d0, pr.value / (d.chi * d.chi));
                o.lines.push_back(fmt("mu=%g delta=%.2f chi=%.2f P=%.6e |rho|=%.6e "
                                      "|P-|rho||/max(chi^2,zeta^2)=%.3f",
                                      mu, delta, chi, pr.value, std::abs(d.rho), a));
            }
    o.pass = worst_rho <= 1.0 && worst_mu0 <= 0.0 && worst_d0 <= 1.0;
    o.summary = fmt("predictability: max |P-|rho||/max(chi^2,zeta^2)=%.3f limit=1; "
                    "max P(mu=0)-err=%.2e limit=0; max P(delta=0)/chi^2=%.3f limit=1",
                    worst_rho, worst_mu0, worst_d0);
    return o;
}

Outcome criterion4()
{
    Outcome o;
    std::ostringstream out, err;
    char const* argv[] = {"cbs", "fig2b"};
    int const code = cli::run(2, argv, out, err);
    std::vector<double> xs, vs, errs;
    std::stringstream ss(out.str());
    std::string line;
    std::getline(ss, line);
    while (std::getline(ss, line))
    {
        std::stringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        xs.push_back(std::stod(cells.at(0)));
        vs.push_back(std::stod(cells.at(1)));
        errs.push_back(std::stod(cells.at(2)));
    }
    bool monotone = xs.size() > 2;
    for (std::size_t k = 1; k < vs.size(); ++k)
        monotone = monotone && vs[k] < vs[k - 1];

    double const x0 = xs.front(), v0 = vs.front();
    double const law = std::abs(v0 * v0 - (1 - 2 * x0))
                       / (kLawXi4 * x0 * x0 + kLawErr * 2 * v0 * errs.front());

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t k = 0; k < xs.size(); ++k)
    {
        if (xs[k] < 25.0 - 1e-9 || xs[k] > 100.0 + 1e-9)
            continue;
        double const lx = std::log(xs[k]), ly = std::log(vs[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    double const slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

    for (std::size_t k = 0; k < xs.size(); ++k)
        o.lines.push_back(fmt("xi_cl^2=%.4g V=%.8f V*xi_cl^2=%.5f", xs[k], vs[k], vs[k] * xs[k]));
    o.lines.push_back(fmt("exit code %d, %d points in the tail fit", code, n));

    o.pass = code == 0 && monotone && law <= 1.0 && n >= 2
             && std::abs(slope - kSlope) <= kSlopeTol;
    o.summary = fmt("visibility curve: monotone=%s small-end deviation/bound=%.3f limit=1; "
                    "tail slope=%.4f limit=%.1f+-%.1f",
                    monotone ? "yes" : "no", law, slope, kSlope, kSlopeTol);
    return o;
}

Outcome criterion5()
{
    Outcome o;
    std::mt19937_64 rng(20040601);
    double worst = 0.0;
    int flagged = 0;
    for (int k = 0; k < kOracleCases; ++k)
    {
        auto const c = cli::random_neutral_case(rng, 8, 0.3, 2.0);
        auto const g = correlator(c.events, c.params);
        auto const r = oracle_correlator(c.events, c.params);
        flagged += r.truncation_flag;
        worst = std::max(worst, std::abs(g - r.value) / std::abs(r.value));
    }
    o.lines.push_back(fmt("%d cases, %d truncation-flagged", kOracleCases, flagged));
    o.pass = worst <= kOracleRel && flagged == 0;
    o.summary = fmt("correlator oracle equivalence: max rel error=%.3e limit=%.0e", worst,
                    kOracleRel);
    return o;
}

PhysParams hot_trap(double theta, double delta, double xi_cl)
{
    double const g2 = delta * delta + 0.25;
    double const omega_ho = 1e-4;
    double const omega_R = xi_cl * xi_cl * theta * g2 / 8 / omega_ho;
    return PhysParams::from_theta(delta, omega_ho, omega_R, theta, 0.0);
}

Outcome criterion6()
{
    Outcome o;
    double const delta = 0.5, xi_cl = 0.1;
    double const limit
        = 2 / std::sqrt(std::numbers::pi) * delta / std::sqrt(delta * delta + 0.25) * xi_cl;
    double prev = INFINITY, last = 0.0;
    bool monotone = true;
    bool flagged = false;
    for (double th : {0.1, 0.05, 0.02, 0.01})
    {
        auto const p = hot_trap(th, delta, xi_cl);
        auto const r = oracle_distinguishability(p, kDistDim);
        auto const ref = oracle_distinguishability(p);
        double const err = std::abs(r.value - limit) / limit;
        monotone = monotone && err < prev;
        flagged = flagged || r.truncation_flag;
        prev = err;
        last = err;
        o.lines.push_back(fmt("theta=%.2f N=%d D=%.7f rel.err=%+.4f%% truncation=%s | "
                              "tail-rule N=%d D=%.7f rel.err=%+.4f%%",
                              th, kDistDim, r.value, 100 * (r.value - limit) / limit,
                              r.truncation_flag ? "yes" : "no", ref.dim, ref.value,
                              100 * (ref.value - limit) / limit));
    }
    o.pass = monotone && last <= kDistRel;
    o.summary = fmt("distinguishability chain at N=%d: monotone=%s final rel error=%.4f "
                    "limit=%.2f (target %.5f)",
                    kDistDim, monotone ? "yes" : "no", last, kDistRel, limit);
    return o;
}

Outcome criterion7()
{
    Outcome o;
    double worst_ineq = -INFINITY, worst_law = 0.0;
    for (double delta : {0.0, 0.25, 0.5, 1.0, 2.0})
        for (double xs : {0.01, 0.05, 0.1})
        {
            cli::ParamFlags f;
            f.delta = delta;
            f.xi_cl_sq = xs;
            auto const r = full_report(cli::resolve(f), {});
            double const sum = r.duality_sum;
            double const e = r.duality_sum_err;
            double const ineq = sum - 1 - kInequalityErr * e;
            double const law = std::abs(sum - r.duality_sum_asymptotic)
                               / (kLawXi4 * xs * xs + kLawErr * e);
            worst_ineq = std::max(worst_ineq, ineq);
            worst_law = std::max(worst_law, law);
            o.lines.push_back(fmt("delta=%.2f xi_cl^2=%.2f V^2+D^2=%.8f analytic=%.8f "
                                  "deviation/bound=%.3f",
                                  delta, xs, sum, r.duality_sum_asymptotic, law));
        }
    o.pass = worst_ineq <= 0.0 && worst_law <= 1.0;
    o.summary = fmt("duality inequality: max V^2+D^2-1-10err=%.3e limit=0; "
                    "unsaturated law max deviation/bound=%.3f limit=1",
                    worst_ineq, worst_law);
    return o;
}

Outcome criterion8()
{
    Outcome o;
    quad::cplx const I(0.0, 1.0), g(0.7, 0.5);
    quad::FunctionIntegrand sep({I * g, I * g, -I * std::conj(g), -I * std::conj(g)},
                                [](quad::Point4 const&) { return quad::cplx(1.0); });
    double const exact = 1 / std::pow(std::norm(g), 2);
    quad::QuadratureSpec spec;
    spec.order = 48;
    auto const t = quad::integrate4d(sep, spec);
    double const sep_rel = std::abs(t.value - exact) / exact;
    o.lines.push_back(fmt("separable: order %d rel error=%.3e", t.order_used, sep_rel));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double worst = 0.0;
    quad::QuadratureSpec mc;
    mc.method = quad::Method::monte_carlo;
    for (int k = 0; k < kMcPoints; ++k)
    {
        PhysParams p;
        p.delta = 2 * uni(rng) - 1;
        p.mu = 2 * uni(rng) - 1;
        p.omega_R = std::pow(10.0, -4 + 2 * uni(rng));
        p.omega_ho = std::pow(10.0, -4 + 2 * uni(rng));
        if (uni(rng) < 0.5)
            p.set_theta(std::pow(10.0, -2 + 2 * uni(rng)));
        for (auto kind : {TraceKind::I_A, TraceKind::INT})
        {
            mc.seed = 1000 + k;
            auto const a = integrate_trace(kind, p, spec);
            auto const b = integrate_trace(kind, p, mc);
            double const bars = a.abs_error_estimate + b.abs_error_estimate;
            double const ratio = std::abs(a.value - b.value) / bars;
            worst = std::max(worst, ratio);
            o.lines.push_back(fmt("delta=%+.3f mu=%+.3f omega_R=%.2e omega_ho=%.2e nbar=%.3g "
                                  "%s tensor=%.6f%+.6fi mc=%.6f%+.6fi |diff|/bars=%.2f",
                                  p.delta, p.mu, p.omega_R, p.omega_ho, p.nbar,
                                  to_string(kind).c_str(), a.value.real(), a.value.imag(),
                                  b.value.real(), b.value.imag(), ratio));
        }
    }
    o.pass = sep_rel <= kSeparableRel && worst <= kErrorBars;
    o.summary = fmt("quadrature self-validation: separable rel error=%.2e limit=%.0e; "
                    "max |tensor-mc|/bars=%.2f limit=%.0f",
                    sep_rel, kSeparableRel, worst, kErrorBars);
    return o;
}

struct Criterion
{
    std::function<Outcome()> run;
    double budget_s;
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance checks"};
    int only = 0;
    bool verbose = true;
    app.add_option("--criterion", only, "run a single criterion (1-8)")->check(CLI::Range(1, 8));
    app.add_flag("!--quiet", verbose, "omit the per-point lines");
    CLI11_PARSE(app, argc, argv);

    std::vector<Criterion> const all{
        {criterion1, 60},  {criterion2, 120}, {criterion3, 120}, {criterion4, 300},
        {criterion5, 120}, {criterion6, 60},  {criterion7, 300}, {criterion8, 600},
    };

    bool ok = true;
    for (int k = 1; k <= 8; ++k)
    {
        if (only != 0 && k != only)
            continue;
        auto const t0 = std::chrono::steady_clock::now();
        auto o = all[k - 1].run();
        double const secs
            = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool const in_time = secs <= all[k - 1].budget_s;
        bool const pass = o.pass && in_time;
        std::cout << (pass ? "PASS" : "FAIL") << " criterion " << k << ": " << o.summary
                  << fmt("; runtime %.1fs limit %.0fs", secs, all[k - 1].budget_s) << "\n";
        if (verbose)
            for (auto const& l : o.lines)
                std::cout << "    " << l << "\n";
        std::cout.flush();
        ok = ok && pass;
    }
    return ok ? 0 : 1;
}
