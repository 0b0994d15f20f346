#pragma once

// Run configuration: an INI-style file with the sections [model], [payoff],
// [discretization], [time], [oracle], [study] and [output]. Unknown sections
// or keys are rejected. Fields that accept "auto" are marked below.
//
//   [model]          beta rho nu x0 y0
//   [payoff]         type (put|call|mass_zero_put|identity) strike eps
//   [discretization] R_x* R_y* y_center* L_x L_y base_cells_x base_cells_y mu*
//                    origin (absorbing|free) lower_vol, upper_vol (intrinsic|zero)
//   [time]           T theta steps* startup_steps*
//   [oracle]         mc_paths mc_steps seed threads
//   [study]          kind (spatial|temporal|projection|manufactured) levels
//                    steps eps barrier*
//   [output]         dir* prefix

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sabrfem/model.hpp"
#include "sabrfem/oracles.hpp"
#include "sabrfem/pricing.hpp"
#include "sabrfem/timestepper.hpp"

namespace sabrfem {

struct RunConfig {
    SabrParams model{0.2, 0.0, 1.0, 1.0, 0.2};

    struct PayoffBlock {
        std::string type = "put";
        double strike = 1.0;
        double eps = 0.01;
    } payoff;

    DiscretizationSpec disc;

    struct TimeBlock {
        double T = 25.0;
        double theta = 0.5;
        int steps = 0;           ///< 0 = auto: max(100, ceil(50 T))
        int startup_steps = -1;  ///< -1 = auto: 2 when theta < 1, else 0
    } time;

    McConfig mc;

    struct StudyBlock {
        std::string kind = "spatial";
        std::vector<int> levels{2, 3, 4, 5};
        std::vector<int> steps{20, 40, 80, 160};
        std::vector<double> eps{0.2, 0.1, 0.05, 0.02, 0.01};
        double barrier = std::numeric_limits<double>::quiet_NaN();
    } study;

    struct OutputBlock {
        std::string dir;  ///< empty = $SABRFEM_OUTPUT_DIR or "."
        std::string prefix = "sabrfem";
    } output;

    Payoff make_payoff() const;
    ThetaConfig theta_config() const;
    std::string output_dir() const;
};

/// Serialized forms compare equal (NaN-valued "auto" fields included).
bool operator==(const RunConfig& a, const RunConfig& b);

/// Names accepted by preset(): paper-exp1, paper-exp2, paper-exp3.
std::vector<std::string> preset_names();
RunConfig preset(const std::string& name);

/// Parses and validates. Throws ParseError (with line), ValidationError
/// (naming the key) or IoError.
RunConfig parse_config(const std::string& text,
                       const std::vector<std::pair<std::string, std::string>>& overrides = {});
RunConfig load_config(const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& overrides = {});

std::string to_ini(const RunConfig& cfg);
void save_config(const RunConfig& cfg, const std::string& path);

/// Range checks across all blocks (levels capped at 7 per axis).
void validate_config(const RunConfig& cfg);

}  // namespace sabrfem
