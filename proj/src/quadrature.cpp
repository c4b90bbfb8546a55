#include "cbs/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "cbs/thread_pool.hpp"

namespace cbs::quad {

namespace {

constexpr int kMaxOrder = 256;

// phi_k(y) = e^{-y/2} L_k(y) for k = 0..kmax, by the three-term recurrence.
void laguerre_functions(double y, int kmax, std::vector<double>& out)
{
    out.resize(static_cast<std::size_t>(kmax) + 1);
    out[0] = std::exp(-0.5 * y);
    if (kmax >= 1)
        out[1] = (1.0 - y) * out[0];
    for (int k = 1; k < kmax; ++k)
    {
        out[k + 1] = ((2.0 * k + 1.0 - y) * out[k] - k * out[k - 1])
                     / (k + 1.0);
    }
}

} // namespace

LaguerreRule gauss_laguerre(int n)
{
    if (n < 1 || n > kMaxOrder)
        throw std::invalid_argument("Gauss-Laguerre order out of range");

    // Golub-Welsch for the nodes, then Newton polishing on L_n.
    Eigen::VectorXd diag(n);
    Eigen::VectorXd sub(std::max(n - 1, 1));
    for (int k = 0; k < n; ++k)
        diag[k] = 2.0 * k + 1.0;
    for (int k = 1; k < n; ++k)
        sub[k - 1] = k;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::EigenvaluesOnly);
    Eigen::VectorXd const eig = solver.eigenvalues();

    LaguerreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    rule.half_scaled_weights.resize(n);
    std::vector<double> phi;
    for (int j = 0; j < n; ++j)
    {
        double y = eig[j];
        for (int it = 0; it < 3; ++it)
        {
            laguerre_functions(y, n, phi);
            // L_n'(y) = n (L_n - L_{n-1}) / y; the e^{-y/2} factors cancel
            double const ratio = y * phi[n] / (n * (phi[n] - phi[n - 1]));
            y -= ratio;
        }
        laguerre_functions(y, n + 1, phi);
        // W = y / ((n+1)^2 L_{n+1}(y)^2)  =>  W e^{y/2} = y e^{-y/2} / (...)
        double const phin1 = phi[n + 1];
        double const hs = y * std::exp(-0.5 * y)
                          / ((n + 1.0) * (n + 1.0) * phin1 * phin1);
        rule.nodes[j] = y;
        rule.half_scaled_weights[j] = hs;
        rule.weights[j] = hs * std::exp(-0.5 * y);
    }
    return rule;
}

Rule1d envelope_rule(int n, cplx rate, double lambda)
{
    double const decay = -rate.real();
    if (!(decay > 0.0))
        throw std::invalid_argument("envelope rate must have Re(rate) < 0");
    if (lambda <= 0.0)
        lambda = decay;
    double const kappa = rate.imag() / decay;

    // Moments of the Laguerre polynomials against e^{-s y}, y = lambda x:
    //   int e^{-s y} L_k(y) dy = (s-1)^k / s^{k+1},  s = -rate / lambda.
    cplx const s = -rate / lambda;
    std::vector<cplx> moments(n);
    cplx const step = (s - 1.0) / s;
    moments[0] = 1.0 / s;
    for (int k = 1; k < n; ++k)
        moments[k] = moments[k - 1] * step;

    LaguerreRule const base = gauss_laguerre(n);
    Rule1d rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    std::vector<double> phi;
    for (int j = 0; j < n; ++j)
    {
        double const y = base.nodes[j];
        cplx w;
        if (kappa == 0.0 && lambda == decay)
        {
            w = base.weights[j];
        }
        else
        {
            // W_j sum_k L_k(y_j) m_k, with W_j L_k = (W_j e^{y/2}) phi_k
            laguerre_functions(y, n - 1, phi);
            cplx acc = 0.0;
            for (int k = 0; k < n; ++k)
                acc += phi[k] * moments[k];
            w = base.half_scaled_weights[j] * acc;
        }
        rule.nodes[j] = y / lambda;
        rule.weights[j] = w / lambda;
    }
    return rule;
}

Rule1d compressed_rule(int n, cplx rate, double lambda)
{
    double const decay = -rate.real();
    if (!(decay > 0.0) || !(lambda > 0.0))
        throw std::invalid_argument("compressed rule needs decaying rates");

    LaguerreRule const base = gauss_laguerre(n);
    Rule1d rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int j = 0; j < n; ++j)
    {
        double const y = base.nodes[j];
        double const x = y / lambda;
        // W e^{y} e^{rate x} = (W e^{y/2}) e^{y/2 + rate x}
        rule.nodes[j] = x;
        rule.weights[j]
            = base.half_scaled_weights[j] * std::exp(0.5 * y + rate * x) / lambda;
    }
    return rule;
}

//---------------------------------------------------------------------------//

std::array<double, 4> Integrand4d::length_scales() const
{
    double const inf = std::numeric_limits<double>::infinity();
    return {inf, inf, inf, inf};
}

cplx Integrand4d::operator()(Point4 const& x) const
{
    auto const r = rates();
    cplx arg = 0.0;
    for (int k = 0; k < 4; ++k)
        arg += r[k] * x[k];
    return std::exp(arg) * smooth(x);
}

cplx Integrand4d::tensor_contract(std::array<Rule1d const*, 4> const& rules,
                                  bool swap_symmetric,
                                  int threads) const
{
    auto const& r0 = *rules[0];
    auto const& r1 = *rules[1];
    auto const& r2 = *rules[2];
    auto const& r3 = *rules[3];
    auto inner = [&](int i, int j, int k, int lb, int le) {
        cplx acc = 0.0;
        Point4 x{r0.nodes[i], r1.nodes[j], r2.nodes[k], 0.0};
        for (int l = lb; l < le; ++l)
        {
            x[3] = r3.nodes[l];
            acc += r3.weights[l] * smooth(x);
        }
        return acc;
    };
    return contract_tensor(rules, swap_symmetric, threads, inner);
}

cplx contract_tensor(std::array<Rule1d const*, 4> const& rules,
                     bool swap_symmetric,
                     int threads,
                     InnerSum const& inner)
{
    auto const& r0 = *rules[0];
    auto const& r1 = *rules[1];
    auto const& r2 = *rules[2];
    int const n0 = static_cast<int>(r0.size());
    int const n1 = static_cast<int>(r1.size());
    int const n2 = static_cast<int>(r2.size());
    int const n3 = static_cast<int>(rules[3]->size());
    if (swap_symmetric && (n0 != n2 || n1 != n3))
        throw std::logic_error("swap-symmetric contraction needs paired rules");

    std::vector<cplx> partial(static_cast<std::size_t>(n0), 0.0);
    parallel_for(static_cast<std::size_t>(n0), threads, [&](std::size_t ui) {
        int const i = static_cast<int>(ui);
        cplx acc_i = 0.0;
        for (int j = 0; j < n1; ++j)
        {
            cplx const wij = r0.weights[i] * r1.weights[j];
            if (!swap_symmetric)
            {
                for (int k = 0; k < n2; ++k)
                    acc_i += wij * r2.weights[k] * inner(i, j, k, 0, n3);
                continue;
            }
            // Pairs (i,j) < (k,l) count twice through their real part; the
            // diagonal (i,j) == (k,l) is real by symmetry.
            double acc = 0.0;
            for (int k = i + 1; k < n2; ++k)
                acc += 2.0 * (wij * r2.weights[k] * inner(i, j, k, 0, n3)).real();
            cplx const wiji = wij * r2.weights[i];
            if (j + 1 < n3)
                acc += 2.0 * (wiji * inner(i, j, i, j + 1, n3)).real();
            acc += (wiji * inner(i, j, i, j, j + 1)).real();
            acc_i += acc;
        }
        partial[ui] = acc_i;
    });

    cplx total = 0.0;
    for (auto const& v : partial)
        total += v;
    return total;
}

//---------------------------------------------------------------------------//

std::string to_string(Method m)
{
    switch (m)
    {
    case Method::tensor_laguerre:
        return "tensor-laguerre";
    case Method::adaptive:
        return "adaptive";
    case Method::monte_carlo:
        return "monte-carlo";
    }
    return "unknown";
}

Method method_from_string(std::string const& s)
{
    if (s == "tensor-laguerre" || s == "tensor")
        return Method::tensor_laguerre;
    if (s == "adaptive")
        return Method::adaptive;
    if (s == "monte-carlo" || s == "mc")
        return Method::monte_carlo;
    throw std::invalid_argument("unknown quadrature method '" + s + "'");
}

void QuadratureSpec::validate() const
{
    if (order < 4 || order > kMaxOrder)
        throw std::invalid_argument("quadrature order must be in [4, 256]");
    if (!(target_rel_error > 0.0 && target_rel_error <= 0.1))
        throw std::invalid_argument("target relative error must be in (0, 0.1]");
    if (method == Method::monte_carlo && mc_samples < 2)
        throw std::invalid_argument("monte-carlo needs at least 2 samples");
    if (max_levels < 0)
        throw std::invalid_argument("max_levels must be >= 0");
}

namespace {

std::array<Rule1d, 4> make_rules(Integrand4d const& f, int order)
{
    auto const r = f.rates();
    auto const len = f.length_scales();
    std::array<double, 4> lambda{};
    std::array<bool, 4> compressed{};
    for (int k = 0; k < 4; ++k)
    {
        double const decay = -r[k].real();
        compressed[k] = len[k] * decay < 1.0;
        lambda[k] = compressed[k] ? kCompression / len[k]
                                  : kEnvelopeStretch * decay;
    }
    std::array<Rule1d, 4> rules;
    for (int k = 0; k < 4; ++k)
    {
        // reuse identical rules; the cost is dominated by the moment sums
        int same = -1;
        for (int m = 0; m < k; ++m)
        {
            if (r[m] == r[k] && lambda[m] == lambda[k]
                && compressed[m] == compressed[k])
                same = m;
        }
        if (same >= 0)
            rules[k] = rules[same];
        else if (compressed[k])
            rules[k] = compressed_rule(order, r[k], lambda[k]);
        else
            rules[k] = envelope_rule(order, r[k], lambda[k]);
    }
    return rules;
}

bool swap_usable(Integrand4d const& f)
{
    auto const r = f.rates();
    auto const len = f.length_scales();
    return f.swap_conjugate() && r[2] == std::conj(r[0])
           && r[3] == std::conj(r[1]) && len[0] == len[2] && len[1] == len[3];
}

std::uint64_t grid_points(int order, bool symmetric)
{
    auto const n2 = static_cast<std::uint64_t>(order) * order;
    return symmetric ? n2 * (n2 + 1) / 2 : n2 * n2;
}

bool within_target(double err, cplx value, double target)
{
    return err == 0.0 || err <= target * std::abs(value);
}

QuadResult integrate_tensor(Integrand4d const& f, QuadratureSpec const& spec)
{
    bool const sym = swap_usable(f);
    int low = std::max(spec.order / 2, 2);
    cplx q_low = tensor_sum(f, low, spec.threads);
    std::uint64_t evals = grid_points(low, sym);

    QuadResult res;
    int order = spec.order;
    for (int level = 0;; ++level)
    {
        cplx const q = tensor_sum(f, order, spec.threads);
        evals += grid_points(order, sym);
        res.value = q;
        res.abs_error_estimate = std::abs(q - q_low);
        res.order_used = order;
        res.converged = within_target(
            res.abs_error_estimate, q, spec.target_rel_error);
        if (res.converged || level >= spec.max_levels
            || 2 * order > kMaxOrder)
            break;
        q_low = q;
        order *= 2;
    }
    res.evaluations = evals;
    return res;
}

//---------------------------------------------------------------------------//
// Adaptive tensor Gauss-Kronrod on the mapped cube
//---------------------------------------------------------------------------//

// 7-point Kronrod extension of the 3-point Gauss rule on [-1, 1].
constexpr std::array<double, 7> kKronrodX = {-0.9604912687080203,
                                             -0.7745966692414834,
                                             -0.4342437493468026,
                                             0.0,
                                             0.4342437493468026,
                                             0.7745966692414834,
                                             0.9604912687080203};
constexpr std::array<double, 7> kKronrodW = {0.1046562260264673,
                                             0.2684880898683334,
                                             0.4013974147759622,
                                             0.4509165386584741,
                                             0.4013974147759622,
                                             0.2684880898683334,
                                             0.1046562260264673};
// Gauss weights on the same abscissae (zero where the node is Kronrod-only).
constexpr std::array<double, 7> kGaussW = {0.0,
                                           0.5555555555555556,
                                           0.0,
                                           0.8888888888888888,
                                           0.0,
                                           0.5555555555555556,
                                           0.0};
constexpr double kMapScale = 4.0; // x = -4 ln(1 - u)

struct Box
{
    std::array<double, 4> lo;
    std::array<double, 4> hi;
    int depth = 0;
    cplx value = 0.0;
    double error = 0.0;
    int split_axis = 0;

    bool operator<(Box const& o) const { return error < o.error; }
};

void evaluate_box(Integrand4d const& f, Box& box)
{
    constexpr int m = 7;
    std::array<std::array<double, m>, 4> u{};
    std::array<std::array<double, m>, 4> xs{};
    std::array<std::array<double, m>, 4> jac{};
    for (int d = 0; d < 4; ++d)
    {
        double const c = 0.5 * (box.lo[d] + box.hi[d]);
        double const h = 0.5 * (box.hi[d] - box.lo[d]);
        for (int a = 0; a < m; ++a)
        {
            u[d][a] = c + h * kKronrodX[a];
            double const one_minus = 1.0 - u[d][a];
            xs[d][a] = -kMapScale * std::log(one_minus);
            jac[d][a] = h * kMapScale / one_minus;
        }
    }

    // values with all Jacobians folded in
    std::vector<cplx> vals(m * m * m * m);
    Point4 x;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                for (int e = 0; e < m; ++e)
                {
                    x = {xs[0][a], xs[1][b], xs[2][c], xs[3][e]};
                    double const jw = jac[0][a] * jac[1][b] * jac[2][c]
                                      * jac[3][e];
                    vals[((a * m + b) * m + c) * m + e] = jw * f(x);
                }

    auto contract = [&](std::array<std::array<double, m> const*, 4> w) {
        cplx acc = 0.0;
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                for (int c = 0; c < m; ++c)
                {
                    double const wabc = (*w[0])[a] * (*w[1])[b] * (*w[2])[c];
                    if (wabc == 0.0)
                        continue;
                    for (int e = 0; e < m; ++e)
                    {
                        acc += wabc * (*w[3])[e]
                               * vals[((a * m + b) * m + c) * m + e];
                    }
                }
        return acc;
    };

    std::array<std::array<double, m> const*, 4> kron
        = {&kKronrodW, &kKronrodW, &kKronrodW, &kKronrodW};
    std::array<std::array<double, m> const*, 4> gauss
        = {&kGaussW, &kGaussW, &kGaussW, &kGaussW};
    box.value = contract(kron);
    box.error = std::abs(box.value - contract(gauss));

    double worst = -1.0;
    for (int d = 0; d < 4; ++d)
    {
        auto mixed = kron;
        mixed[d] = &kGaussW;
        double const e = std::abs(box.value - contract(mixed));
        if (e > worst)
        {
            worst = e;
            box.split_axis = d;
        }
    }
}

QuadResult integrate_adaptive(Integrand4d const& f, QuadratureSpec const& spec)
{
    constexpr std::uint64_t evals_per_box = 7 * 7 * 7 * 7;
    int const max_depth = std::max(spec.max_levels, 1) * 12;

    std::priority_queue<Box> heap;
    std::vector<Box> finished;
    Box root;
    root.lo = {0.0, 0.0, 0.0, 0.0};
    root.hi = {1.0, 1.0, 1.0, 1.0};
    evaluate_box(f, root);
    heap.push(root);
    std::uint64_t evals = evals_per_box;
    int boxes = 1;

    auto totals = [&] {
        cplx v = 0.0;
        double e = 0.0;
        auto copy = heap;
        while (!copy.empty())
        {
            v += copy.top().value;
            e += copy.top().error;
            copy.pop();
        }
        for (auto const& b : finished)
        {
            v += b.value;
            e += b.error;
        }
        return std::pair{v, e};
    };

    cplx value = root.value;
    double error = root.error;
    while (!heap.empty() && boxes + 1 < spec.adaptive_max_boxes)
    {
        if (within_target(error, value, spec.target_rel_error))
            break;
        Box worst = heap.top();
        heap.pop();
        if (worst.depth >= max_depth)
        {
            finished.push_back(worst);
            continue;
        }
        int const d = worst.split_axis;
        double const mid = 0.5 * (worst.lo[d] + worst.hi[d]);
        std::array<Box, 2> halves{worst, worst};
        halves[0].hi[d] = mid;
        halves[1].lo[d] = mid;
        parallel_for(2, spec.threads, [&](std::size_t h) {
            halves[h].depth = worst.depth + 1;
            evaluate_box(f, halves[h]);
        });
        value += halves[0].value + halves[1].value - worst.value;
        error += halves[0].error + halves[1].error - worst.error;
        heap.push(halves[0]);
        heap.push(halves[1]);
        evals += 2 * evals_per_box;
        ++boxes;
    }

    // resum to avoid drift from the running updates
    auto const [v, e] = totals();
    QuadResult res;
    res.value = v;
    res.abs_error_estimate = e;
    res.evaluations = evals;
    res.converged = within_target(e, v, spec.target_rel_error);
    res.order_used = 7;
    return res;
}

//---------------------------------------------------------------------------//
// Monte Carlo
//---------------------------------------------------------------------------//

QuadResult integrate_mc(Integrand4d const& f, QuadratureSpec const& spec)
{
    auto const rates = f.rates();
    std::array<double, 4> decay{};
    for (int k = 0; k < 4; ++k)
    {
        decay[k] = -rates[k].real();
        if (!(decay[k] > 0.0))
            throw std::invalid_argument("monte-carlo needs decaying envelopes");
    }

    // Fixed chunking keeps results independent of the worker count.
    constexpr std::size_t chunks = 64;
    std::uint64_t const n = spec.mc_samples;
    struct Acc
    {
        cplx sum = 0.0;
        double sq = 0.0;
    };
    std::vector<Acc> acc(chunks);
    parallel_for(chunks, spec.threads, [&](std::size_t c) {
        std::uint64_t const begin = n * c / chunks;
        std::uint64_t const end = n * (c + 1) / chunks;
        std::seed_seq seq{spec.seed, static_cast<std::uint64_t>(c)};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        Acc a;
        Point4 x;
        for (std::uint64_t s = begin; s < end; ++s)
        {
            double inv_density = 1.0;
            cplx arg = 0.0;
            for (int k = 0; k < 4; ++k)
            {
                x[k] = -std::log1p(-uni(rng)) / decay[k];
                inv_density /= decay[k];
                // envelope divided by the sampling density e^{-decay x}
                arg += cplx(0.0, rates[k].imag() * x[k]);
            }
            cplx const v = inv_density * std::exp(arg) * f.smooth(x);
            a.sum += v;
            a.sq += std::norm(v);
        }
        acc[c] = a;
    });

    cplx sum = 0.0;
    double sq = 0.0;
    for (auto const& a : acc)
    {
        sum += a.sum;
        sq += a.sq;
    }
    double const dn = static_cast<double>(n);
    cplx const mean = sum / dn;
    double const var = std::max(sq / dn - std::norm(mean), 0.0);

    QuadResult res;
    res.value = mean;
    res.abs_error_estimate = std::sqrt(var / (dn - 1.0));
    res.evaluations = n;
    res.converged = within_target(
        res.abs_error_estimate, mean, spec.target_rel_error);
    return res;
}

} // namespace

cplx tensor_sum(Integrand4d const& f, int order, int threads)
{
    auto const rules = make_rules(f, order);
    std::array<Rule1d const*, 4> ptrs
        = {&rules[0], &rules[1], &rules[2], &rules[3]};
    return f.tensor_contract(ptrs, swap_usable(f), threads);
}

QuadResult integrate4d(Integrand4d const& f, QuadratureSpec const& spec)
{
    spec.validate();
    switch (spec.method)
    {
    case Method::tensor_laguerre:
        return integrate_tensor(f, spec);
    case Method::adaptive:
        return integrate_adaptive(f, spec);
    case Method::monte_carlo:
        return integrate_mc(f, spec);
    }
    throw std::logic_error("unhandled quadrature method");
}

} // namespace cbs::quad
