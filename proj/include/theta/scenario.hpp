#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "theta/fweil.hpp"

namespace theta {

using Json = nlohmann::ordered_json;

// ---- scenario files ----
//
// Line-oriented structured text, versioned by the first line
// "theta-scenario v1".  Sections in brackets, "key = value" entries.
// Matrices are rows separated by ';' with whitespace-separated rational
// entries "a" or "a/b".  Sections:
//   [tower]    p, precision
//   [algebra]  kind = split | unram_quad | ram_quad
//   [space]    eps, gram
//   [datum]    gradings, period, x_basis?, gamma?, basis?, block*,
//              phi, rho_l, rho_lstar
//   [target]   eps, aniso_dim, disc, hasse, disc_norm
//   [checks]   check = <bundle> (repeatable), samples
// [target] and [checks] are optional; a lift request without [target] is
// rejected with a diagnostic naming the section.

struct ScenarioError : std::runtime_error {
    int line;           // 1-based; 0 when not tied to a line
    std::string field;  // offending key or section, possibly empty
    ScenarioError(int line_, std::string field_, const std::string& what_)
        : std::runtime_error(what_), line(line_), field(std::move(field_)) {}
};

// One certificate block: eigenvalue from_rational(num, den) * pi_E^pipow in
// the tower E = (p, f, e) over the scenario's base.
struct ScenarioBlock {
    int f = 1, e = 1;
    long long num = 0, den = 1;
    long long pipow = 0;
    int mult = 1;
};

struct Scenario {
    int version = 1;
    long p = 0;
    int precision = 10;
    AlgKind kind = AlgKind::split;
    int eps = 1;
    std::vector<std::vector<Rat>> gram;
    std::vector<Rat> gradings;
    long period = 1;                       // the "m" of the lattice function
    std::vector<std::vector<Rat>> x_basis; // empty = identity
    std::vector<std::vector<Rat>> gamma;   // empty = zero
    std::vector<std::vector<Rat>> sbasis;  // spectral basis; empty = identity
    std::vector<ScenarioBlock> blocks;     // empty = one zero block of full size
    std::string phi = "phi0";
    int rho_l = 0, rho_lstar = 0;
    bool has_target = false;
    int target_eps = 1;
    int target_aniso = 0;
    long long target_disc = 1;   // integer; its square class mod p is taken
    int target_hasse = 1;
    int target_disc_norm = 1;
    std::vector<std::string> checks;
    int samples = 3;
};

Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario(const std::string& path);  // ScenarioError on failure
std::string emit_scenario(const Scenario& s);     // round-trips through parse

// ---- instantiation ----

struct BuiltScenario {
    Scenario sc;
    AlgebraPtr alg;
    SpacePtr V;
    DatumSkeleton datum;
    bool has_target = false;
    WittClass target;
};

BuiltScenario build_scenario(const Scenario& s);
WittClass target_class(const Scenario& s, const AlgebraPtr& alg);

// ---- the lift pipeline ----

struct LiftOutcome {
    std::vector<DatumSkeleton> in_blocks;    // block decomposition of the input
    std::vector<TransportResult> positive;   // one per positive-depth block
    bool ran_zero = false;
    std::shared_ptr<DepthZeroLift> zero;     // set when ran_zero
    WittClass residual;                      // target minus the positive classes
    DatumSkeleton source;                    // input re-assembled in block order
    DatumSkeleton assembled;                 // the lifted datum on V'
    Mat w;                                   // global block-diagonal w : V -> V'
    WittClass target, achieved;
    bool witt_ok = false;      // achieved == target
    bool moment_ok = false;    // M(w) = Gamma modulo the level-0 filtration
    bool moment_p_ok = false;  // M'(w) = Gamma' modulo the level-0 filtration
    bool depth_ok = false;     // datum depth preserved
};

// Full lift of a (possibly mixed-depth) datum along the target Witt class:
// block decomposition, one theta-plus transport per positive block, residual
// class by Witt subtraction, depth-zero lift of the last block, direct sum.
LiftOutcome lift_datum(const DatumSkeleton& datum, const WittClass& Tp, int rho_l = 0,
                       int rho_lstar = 0, int tower_cap = 3, long long op_budget = 729);

// ---- reports and verification ----

// Reports are byte-reproducible for a fixed scenario and seed: no floating
// timings inside, rationals rendered as strings, canonical key order.
Json lift_report(const BuiltScenario& b, unsigned long long seed);
Json factorize_report(const BuiltScenario& b, unsigned long long seed);
Json weil_report(const BuiltScenario& b, unsigned long long seed, long long op_budget = 729);
Json witt_report(const BuiltScenario& b, unsigned long long seed);

// Runs the requested predicate bundles ("lattice", "factorization",
// "momentmap", "finite-weil", "momentmap-corrupt") with the fixed seed; an
// empty list yields a report with no checks.  Unknown bundle names throw
// ScenarioError.
Json run_verification_suite(const BuiltScenario& b, const std::vector<std::string>& checks,
                            unsigned long long seed);

// Canonical bytes of a report and the human-readable summary.
std::string render_report(const Json& report);
std::string summarize_report(const Json& report);
// True when every "pass" field in the report is true.
bool report_all_pass(const Json& report);

}  // namespace theta
