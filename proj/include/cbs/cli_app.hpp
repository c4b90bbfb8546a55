#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cbs/correlator.hpp"
#include "cbs/observables.hpp"
#include "cbs/params.hpp"
#include "cbs/quadrature.hpp"

namespace cbs::cli {

inline constexpr char const* kSchemaVersion = "cbs-duality/1";

enum ExitCode : int
{
    ok = 0,
    usage_error = 1,
    not_converged = 2,
    validation_failed = 3
};

/*!
 * Physical flags as given on the command line. The thermal state comes from
 * at most one of nbar, theta, xi_cl_sq, xi_cl. The high-level xi_cl_sq and
 * xi_cl back-solve theta from coth(theta/2) zeta^2 = xi_cl_sq with
 * omega_R = 1e-3 and omega_ho = 1e-4 unless those are given explicitly.
 */
struct ParamFlags
{
    std::optional<double> delta;
    std::optional<double> omega_ho;
    std::optional<double> omega_R;
    std::optional<double> nbar;
    std::optional<double> theta;
    std::optional<double> mu;
    std::optional<double> xi_cl_sq;
    std::optional<double> xi_cl;

    //! Sets one sweepable parameter; thermal names replace the others.
    void set(std::string const& name, double value);
};

inline constexpr double kDefaultOmegaR = 1e-3;
inline constexpr double kDefaultOmegaHo = 1e-4;

//! Throws InvalidParams naming the violated invariant.
PhysParams resolve(ParamFlags const& flags);

//! Names accepted by ParamFlags::set and sweep axes.
std::vector<std::string> const& sweepable_names();

struct AxisSpec
{
    std::string name;
    double min = 0.0;
    double max = 0.0;
    int count = 2;
    bool log = false;

    std::vector<double> values() const;
};

//! "name:min:max:count[:lin|log]"; throws std::invalid_argument.
AxisSpec parse_axis(std::string const& text);

//! Parameters used by fig2b: delta = 0, omega_ho = 1e-4,
//! omega_R = min(1e-3, 0.005 xi_cl^2 |gamma|), keeping chi / xi_cl^2 below 0.01.
PhysParams fig2b_params(double xi_cl_sq);

//---------------------------------------------------------------------------//
// Validation suite
//---------------------------------------------------------------------------//

struct ValidateHooks
{
    bool flip_kernel_sign = false; //!< mutation check for the oracle suite
    double fock_scale = 1.0;       //!< multiplies every Fock dimension
    int oracle_cases = 24;
    std::uint64_t seed = 20040601;
    int threads = 0;
};

struct CheckResult
{
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double limit = 0.0;
    std::string detail;
};

struct RandomCase
{
    PhysParams params;
    EventList events;
};

/*!
 * Random per-atom neutral event list: up to max_events factors, wavevectors
 * with components in {-1, 0, 1} along khat and nhat, times spread over one
 * trap period. eta^2 in [0.01, eta_sq_max], nbar in [0, nbar_max].
 */
RandomCase random_neutral_case(std::mt19937_64& rng,
                               int max_events = 8,
                               double eta_sq_max = 0.3,
                               double nbar_max = 2.0);

std::vector<CheckResult> run_validation(ValidateHooks const& hooks);

//! Entry point of the cbs executable.
int run(int argc, char const* const* argv, std::ostream& out, std::ostream& err);

} // namespace cbs::cli
