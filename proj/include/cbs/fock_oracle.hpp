#pragma once

#include <complex>
#include <string>

#include <Eigen/Dense>

#include "cbs/correlator.hpp"
#include "cbs/params.hpp"

namespace cbs {

/*!
 * Dense operator on the Fock space of one mode truncated to |0>..|N-1>.
 *
 * Modes are normalized, [b, b^dag] = 1. The unnormalized relative mode
 * (a_1 - a_2).khat has commutator 2 and equals sqrt(2) b.
 */
struct FockOp
{
    int dim = 0;
    Eigen::MatrixXcd m;
    std::string tag;
    //! Set when the truncation is known to be inadequate for this operator.
    bool truncation_flag = false;
    //! Weight lost to truncation, where meaningful (thermal states).
    double tail_weight = 0.0;
};

FockOp annihilation(int N);

//! Dimensionless momentum i(b^dag - b)/sqrt(2).
FockOp momentum(int N);

/*!
 * exp(c b^dag - c^* b) from the closed-form matrix elements
 *   <n+k|D|n> = e^{-|c|^2/2} c^k sqrt(n!/(n+k)!) L_n^{(k)}(|c|^2),
 *   <n|D|n+k> = e^{-|c|^2/2} (-c^*)^k sqrt(n!/(n+k)!) L_n^{(k)}(|c|^2),
 * using a normalized Laguerre recurrence. Flags |c|^2 > N.
 */
FockOp displacement_matrix(std::complex<double> c, int N);

//! Boltzmann weights (1-r) r^n, r = nbar/(nbar+1), renormalized after
//! truncation. tail_weight = r^N; flagged above 1e-12.
FockOp thermal_state(double nbar, int N);

//! max |U^dag U - I| over the leading n_block x n_block block.
double unitarity_defect(FockOp const& u, int n_block);

//! Sum of singular values.
double trace_norm(Eigen::MatrixXcd const& x);
inline double trace_norm(FockOp const& x)
{
    return trace_norm(x.m);
}

struct OracleResult
{
    std::complex<double> value;
    int dim = 0;              //!< Fock dimension actually used
    int recommended_dim = 0;  //!< dimension demanded by the tail rule
    double tail_weight = 0.0; //!< thermal weight outside the traced block
    bool truncation_flag = false;
};

/*!
 * Dimension rule for the correlator oracle: the thermal trace is kept over
 * n < n_th with r^{n_th} < 1e-15, and displacements with total amplitude
 * s move a state by at most ~ (sqrt(n_th) + s)^2 quanta, padded by 8 sigma.
 */
int oracle_dim_rule(double nbar, double total_amplitude);

/*!
 * Brute-force thermal expectation of an ordered product of displacement
 * exponentials. Each atom has two relevant normalized modes, along khat and
 * along the part of nhat orthogonal to khat; the factor e^{i q.u(t)} becomes
 * D(i eta (q.e) e^{i omega_ho t}) on mode e. Neutrality is not required.
 * N <= 0 selects oracle_dim_rule.
 */
OracleResult oracle_correlator(EventList const& events,
                               PhysParams const& p,
                               int N = 0);

struct DistinguishabilityResult
{
    double value = 0.0;
    int dim = 0;
    double tail_weight = 0.0;
    bool truncation_flag = false; //!< thermal tail above 1e-10
    bool regime_flag = false;     //!< theta > 0.1 (not a shallow, hot trap)
};

//! Smallest N with thermal tail r^N below `tail`.
int thermal_dim_rule(double nbar, double tail = 1e-12);

/*!
 * Distinguishability from the trace norm of the thermal state times the
 * relative momentum,
 *   D = 4 (|delta|/|gamma|^2) sqrt(omega_R omega_ho) tr|rho_th p|,
 * p = i(b^dag - b)/sqrt(2) on the normalized relative mode. As theta -> 0
 * this tends to (2/sqrt(pi)) (|delta|/|gamma|) xi_cl. N <= 0 selects
 * thermal_dim_rule.
 */
DistinguishabilityResult oracle_distinguishability(PhysParams const& p,
                                                   int N = 0);

} // namespace cbs
