#pragma once

#include "potlab/discrete_domain.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace potlab {

enum class SolveStatus { converged, max_iter, infeasible };

struct SolveReport {
    SolveStatus status = SolveStatus::converged;
    int iterations = 0;    // Newton-type iterations summed over continuation
    double energy = 0.0;   // unregularized D_p at the returned iterate
    double residual = 0.0; // projected-gradient norm at the final epsilon
    double epsilon = 0.0;  // final regularization used
};

std::string to_string(SolveStatus s);

struct SolverOptions {
    double tol = 1e-9;
    int max_iter = 200;         // per continuation stage
    double eps_start = 1e-2;    // |grad u| regularization continuation
    double eps_final = 1e-10;
    int cg_max = 30000;         // inner CG budget (surface grids)
    const ScalarField* warm_start = nullptr;
};

/// Pinned node values (Dirichlet data). Nodes not listed are free.
struct PinnedValues {
    std::vector<std::uint32_t> nodes;
    std::vector<double> values;

    void pin(std::uint32_t n, double v) {
        nodes.push_back(n);
        values.push_back(v);
    }
    void pin_all(std::span<const std::uint32_t> ns, double v) {
        for (auto n : ns) pin(n, v);
    }
};

/// Obstacle problem: minimize the p-energy over fields >= obstacle on free
/// nodes with the given pinned boundary data. An obstacle value of -inf
/// disables the constraint at that node; boundary.values must dominate the
/// obstacle there (else the solve reports infeasible). The common
/// one-argument form (boundary data equal to the obstacle) is
/// obstacle_default_boundary().
struct ObstacleProblemSpec {
    const DiscreteDomain* domain = nullptr;
    double p = 2.0;
    ScalarField obstacle; // may hold -inf entries
    PinnedValues boundary;

    static constexpr double unconstrained = -std::numeric_limits<double>::infinity();
};

/// theta = psi on the tagged boundary nodes.
ObstacleProblemSpec obstacle_default_boundary(const DiscreteDomain& d, double p,
                                              ScalarField psi);

/// Discrete p-Dirichlet energy: sum over faces of vol * (c|du|)^p
/// (sphere-area factor included in the face volumes).
double p_energy(const DiscreteDomain& d, const ScalarField& u, double p);

struct DirichletResult {
    ScalarField field;
    SolveReport report;
};

struct ObstacleResult {
    ScalarField field;
    SolveReport report;
    std::vector<std::uint32_t> contact;     // u - psi <= 10*tol
    std::vector<std::uint32_t> non_contact; // free nodes off contact
};

/// Unique minimizer of the p-energy with the given pinned values.
DirichletResult solve_dirichlet(const DiscreteDomain& d, const PinnedValues& boundary,
                                double p, const SolverOptions& opt = {});

/// Unique minimizer over the obstacle-constrained feasible set.
ObstacleResult solve_obstacle(const ObstacleProblemSpec& spec,
                              const SolverOptions& opt = {});

/// Weak p-Laplacian value against each nodal hat function:
/// v_i = sum_faces vol |grad u|^(p-2) <grad u, grad phi_i>, unregularized.
/// u is p-superharmonic at i when v_i >= 0, p-subharmonic when v_i <= 0.
std::vector<double> weak_plaplacian(const DiscreteDomain& d, const ScalarField& u,
                                    double p);

struct SupersolutionCheck {
    bool pass = true;
    std::vector<std::uint32_t> failing;
    double worst = 0.0; // most negative tested value (supersolution case)
};

/// Asserts v_i >= -tol at every checked node. By default every node that is
/// not boundary-tagged is checked; `exclude` removes further nodes (e.g. a
/// pinned compactum). The subsolution mirror checks v_i <= tol.
SupersolutionCheck check_supersolution(const DiscreteDomain& d, const ScalarField& u,
                                       double p, double tol,
                                       std::span<const std::uint32_t> exclude = {});
SupersolutionCheck check_subsolution(const DiscreteDomain& d, const ScalarField& u,
                                     double p, double tol,
                                     std::span<const std::uint32_t> exclude = {});

} // namespace potlab
