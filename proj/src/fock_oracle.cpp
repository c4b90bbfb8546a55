#include "cbs/fock_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/SVD>

namespace cbs {

namespace {

void check_dim(int N)
{
    if (N < 2)
        throw std::invalid_argument("Fock dimension must be >= 2");
}

double thermal_ratio(double nbar)
{
    return nbar / (nbar + 1.0);
}

std::vector<double> thermal_weights(double nbar, int N, double* tail)
{
    std::vector<double> w(N, 0.0);
    if (nbar == 0.0)
    {
        w[0] = 1.0;
        *tail = 0.0;
        return w;
    }
    double const log_r = std::log(thermal_ratio(nbar));
    double sum = 0.0;
    for (int n = 0; n < N; ++n)
    {
        w[n] = std::exp(n * log_r);
        sum += w[n];
    }
    for (auto& x : w)
        x /= sum;
    *tail = std::exp(N * log_r);
    return w;
}

} // namespace

FockOp annihilation(int N)
{
    check_dim(N);
    FockOp op{N, Eigen::MatrixXcd::Zero(N, N), "b", false, 0.0};
    for (int n = 1; n < N; ++n)
        op.m(n - 1, n) = std::sqrt(static_cast<double>(n));
    return op;
}

FockOp momentum(int N)
{
    auto const b = annihilation(N);
    FockOp op{N,
              std::complex<double>(0.0, 1.0 / std::sqrt(2.0))
                  * (b.m.adjoint() - b.m),
              "p",
              false,
              0.0};
    return op;
}

FockOp displacement_matrix(std::complex<double> c, int N)
{
    check_dim(N);
    double const x = std::norm(c);
    FockOp op{N, Eigen::MatrixXcd::Zero(N, N), "D", x > N, 0.0};

    // h_k = e^{-x/2} c^k / sqrt(k!), hm_k the same with -c^*
    std::complex<double> h = std::exp(-0.5 * x);
    std::complex<double> hm = h;
    for (int k = 0; k < N; ++k)
    {
        if (k > 0)
        {
            double const s = 1.0 / std::sqrt(static_cast<double>(k));
            h *= c * s;
            hm *= -std::conj(c) * s;
        }
        if (h == 0.0)
            break;
        // g_n = sqrt(k! n! / (n+k)!) L_n^{(k)}(x)
        double g_prev = 0.0;
        double g = 1.0;
        for (int n = 0; n + k < N; ++n)
        {
            op.m(n + k, n) = h * g;
            if (k > 0)
                op.m(n, n + k) = hm * g;
            double const next
                = ((2.0 * n + 1.0 + k - x) * g
                   - std::sqrt(static_cast<double>(n) * (n + k)) * g_prev)
                  / std::sqrt((n + 1.0) * (n + 1.0 + k));
            g_prev = g;
            g = next;
        }
    }
    return op;
}

FockOp thermal_state(double nbar, int N)
{
    check_dim(N);
    if (!(nbar >= 0.0))
        throw std::invalid_argument("nbar must be >= 0");
    double tail = 0.0;
    auto const w = thermal_weights(nbar, N, &tail);
    FockOp op{N, Eigen::MatrixXcd::Zero(N, N), "rho_th", tail > 1e-12, tail};
    for (int n = 0; n < N; ++n)
        op.m(n, n) = w[n];
    return op;
}

double unitarity_defect(FockOp const& u, int n_block)
{
    n_block = std::clamp(n_block, 0, u.dim);
    if (n_block == 0)
        return 0.0;
    Eigen::MatrixXcd const cols = u.m.leftCols(n_block);
    Eigen::MatrixXcd const gram = cols.adjoint() * cols
                                  - Eigen::MatrixXcd::Identity(n_block, n_block);
    return gram.cwiseAbs().maxCoeff();
}

double trace_norm(Eigen::MatrixXcd const& x)
{
    if (x.size() == 0)
        return 0.0;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(x);
    return svd.singularValues().sum();
}

int oracle_dim_rule(double nbar, double total_amplitude)
{
    int n_th = 1;
    if (nbar > 0.0)
    {
        n_th = static_cast<int>(
            std::ceil(std::log(1e-15) / std::log(thermal_ratio(nbar))));
    }
    double const reach = std::sqrt(static_cast<double>(n_th))
                         + total_amplitude + 5.0;
    return std::max(n_th + 2, static_cast<int>(std::ceil(reach * reach)));
}

OracleResult oracle_correlator(EventList const& events,
                               PhysParams const& p,
                               int N)
{
    p.validate();
    OracleResult out;
    out.value = 1.0;

    double const eta = std::sqrt(p.eta_sq());
    double const perp = std::sqrt(std::max(0.0, 1.0 - p.mu * p.mu));

    for (int atom = 1; atom <= 2; ++atom)
    {
        for (int mode = 0; mode < 2; ++mode)
        {
            // displacement arguments on this mode, operator order
            std::vector<std::complex<double>> args;
            double amplitude = 0.0;
            for (auto const& e : events)
            {
                if (e.atom != atom)
                    continue;
                double const proj = mode == 0
                                        ? e.q.along_k + p.mu * e.q.along_n
                                        : e.q.along_n * perp;
                if (proj == 0.0)
                    continue;
                auto const phase
                    = std::polar(1.0, p.omega_ho * e.time);
                args.push_back(std::complex<double>(0.0, eta * proj) * phase);
                amplitude += std::abs(args.back());
            }
            if (args.empty())
                continue;

            int const rule = oracle_dim_rule(p.nbar, amplitude);
            int const dim = N > 0 ? N : rule;
            check_dim(dim);
            double tail = 0.0;
            auto const w = thermal_weights(p.nbar, dim, &tail);

            // trace over the block of states carrying thermal weight
            int block = dim;
            while (block > 1 && w[block - 1] < 1e-18)
                --block;
            double const log_r
                = p.nbar > 0 ? std::log(thermal_ratio(p.nbar)) : -INFINITY;
            tail = std::max(tail, std::exp(block * log_r));

            Eigen::MatrixXcd x = Eigen::MatrixXcd::Identity(dim, block);
            bool flag = dim < rule;
            for (auto it = args.rbegin(); it != args.rend(); ++it)
            {
                auto const d = displacement_matrix(*it, dim);
                flag = flag || d.truncation_flag;
                x = d.m * x;
            }
            std::complex<double> mode_value = 0.0;
            for (int n = 0; n < block; ++n)
                mode_value += w[n] * x(n, n);

            out.value *= mode_value;
            out.dim = std::max(out.dim, dim);
            out.recommended_dim = std::max(out.recommended_dim, rule);
            out.tail_weight = std::max(out.tail_weight, tail);
            out.truncation_flag = out.truncation_flag || flag;
        }
    }
    return out;
}

int thermal_dim_rule(double nbar, double tail)
{
    if (nbar == 0.0)
        return 2;
    return std::max(
        2, static_cast<int>(std::ceil(std::log(tail) / std::log(thermal_ratio(nbar)))));
}

DistinguishabilityResult oracle_distinguishability(PhysParams const& p, int N)
{
    p.validate();
    int const dim = N > 0 ? N : thermal_dim_rule(p.nbar);
    check_dim(dim);

    DistinguishabilityResult out;
    out.dim = dim;
    double tail = 0.0;
    auto const w = thermal_weights(p.nbar, dim, &tail);
    out.tail_weight = tail;
    out.truncation_flag = tail > 1e-10;
    out.regime_flag = !(p.theta() <= 0.1);

    // rho_th p with p = i A / sqrt(2), A real tridiagonal and antisymmetric.
    // The phase i drops out of the singular values, and A only links even
    // and odd states, so the spectrum splits into two bidiagonal blocks.
    int const n_even = (dim + 1) / 2;
    int const n_odd = dim / 2;
    Eigen::MatrixXd even_odd = Eigen::MatrixXd::Zero(n_even, n_odd);
    Eigen::MatrixXd odd_even = Eigen::MatrixXd::Zero(n_odd, n_even);
    auto elem = [&](int m, int n) {
        // <m|A|n>: sqrt(n+1) below the diagonal, -sqrt(n) above
        if (m == n + 1)
            return std::sqrt(static_cast<double>(n + 1) / 2.0);
        if (n == m + 1)
            return -std::sqrt(static_cast<double>(m + 1) / 2.0);
        return 0.0;
    };
    for (int i = 0; i < n_even; ++i)
    {
        for (int j : {i - 1, i})
        {
            if (j >= 0 && j < n_odd)
                even_odd(i, j) = w[2 * i] * elem(2 * i, 2 * j + 1);
        }
    }
    for (int i = 0; i < n_odd; ++i)
    {
        for (int j : {i, i + 1})
        {
            if (j < n_even)
                odd_even(i, j) = w[2 * i + 1] * elem(2 * i + 1, 2 * j);
        }
    }
    double norm = 0.0;
    for (auto const* blk : {&even_odd, &odd_even})
    {
        if (blk->size() == 0)
            continue;
        Eigen::BDCSVD<Eigen::MatrixXd> svd(*blk);
        norm += svd.singularValues().sum();
    }

    double const gamma_sq = p.delta * p.delta + 0.25;
    out.value = 4.0 * std::abs(p.delta) / gamma_sq
                * std::sqrt(p.omega_R * p.omega_ho) * norm;
    return out;
}

} // namespace cbs
