#pragma once

#include "potlab/model_manifold.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace potlab {

enum class DomainKind { radial1d, surface2d };
enum class BoundaryTag : std::uint8_t { none = 0, inner = 1, outer = 2 };

/// Finite computational arena: nodes with coordinates and boundary tags,
/// plus gradient faces. Each face contributes  vol * (c * |du|)^p  to the
/// discrete p-energy, with du the node-value difference across it. vol and
/// c are stored as logarithms so strongly graded grids (radii far beyond
/// the range where vol itself is representable) still assemble finite
/// combined weights w = vol * c^p.
///
/// Immutable after build; fields are value objects over a domain reference.
class DiscreteDomain {
public:
    /// Radial grid on [base_radius, r_max] with M cells. grading_ratio is
    /// the cell-to-cell size ratio (1 = uniform; (r_max/rbar)^(1/M) gives a
    /// log-uniform grid). Node 0 is tagged inner, node M outer.
    static DiscreteDomain build_radial_grid(const ModelManifold& m, double p_hint,
                                            double r_max, int cells,
                                            double grading_ratio = 1.0);

    /// Tensor (r, theta) grid on a surface of revolution (dimension 2
    /// models only), theta periodic with M_theta >= 8 even. Face energies:
    /// radial faces carry c = 1/dr, angular faces c = 1/(A(r) dtheta);
    /// volume weights A(r) dr dtheta.
    static DiscreteDomain build_surface_grid(const ModelManifold& m, double r_max,
                                             int cells_r, int cells_theta,
                                             double grading_ratio = 1.0);

    DomainKind kind() const { return kind_; }
    std::size_t node_count() const { return r_.size(); }
    std::size_t face_count() const { return fa_.size(); }

    double node_r(std::size_t i) const { return r_[i]; }
    double node_theta(std::size_t i) const { return theta_.empty() ? 0.0 : theta_[i]; }
    BoundaryTag tag(std::size_t i) const { return tag_[i]; }

    std::span<const double> radii() const { return r_; }
    std::span<const double> thetas() const { return theta_; }
    std::span<const std::uint32_t> face_a() const { return fa_; }
    std::span<const std::uint32_t> face_b() const { return fb_; }
    std::span<const double> face_log_vol() const { return flv_; }
    std::span<const double> face_log_c() const { return flc_; }

    int cells_r() const { return nr_; }
    int cells_theta() const { return nth_; }
    bool theta_periodic() const { return nth_ > 0; }
    /// Node id of (radial index, angular index); angular index taken mod
    /// the angular resolution.
    std::uint32_t node_id(int ir, int itheta) const;

    std::vector<std::uint32_t> inner_nodes() const;
    std::vector<std::uint32_t> outer_nodes() const;

    /// Metric mesh size: the largest of dr and (angular arc length over c)
    /// entering any face; first-order accuracy statements are in this h.
    double mesh_size() const { return mesh_size_; }

    /// Combined face weights for exponent p: w[i] = vol_i * c_i^p and the
    /// squared inverse gradient coefficient sigma2[i] = 1/c_i^2 used by the
    /// |grad u| regularization (capped at 1e300 where it overflows).
    struct FaceWeights {
        std::vector<double> w;
        std::vector<double> sigma2;
    };
    FaceWeights face_weights(double p) const;

    /// Sum of face volumes (inf on grids graded beyond the representable
    /// volume range; such grids are used with log-assembled weights only).
    double total_volume() const;

    const ModelManifold& manifold() const { return manifold_; }

private:
    DiscreteDomain(ModelManifold m) : manifold_(std::move(m)) {}

    ModelManifold manifold_;
    DomainKind kind_ = DomainKind::radial1d;
    int nr_ = 0, nth_ = 0;
    std::vector<double> r_, theta_;
    std::vector<BoundaryTag> tag_;
    std::vector<std::uint32_t> fa_, fb_;
    std::vector<double> flv_, flc_;
    double mesh_size_ = 0.0;
};

/// Node-indexed real values over a domain. The domain outlives the field.
struct ScalarField {
    const DiscreteDomain* domain = nullptr;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const DiscreteDomain& d, double fill = 0.0)
        : domain(&d), values(d.node_count(), fill) {}

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }
};

/// {i : u_i <= t} (strict = false) or {i : u_i < t} (strict = true).
std::vector<std::uint32_t> sublevel_region(const ScalarField& u, double t, bool strict);

/// Nested node subsets D_0 c D_1 c ... c D_N with D_N covering the domain.
/// Stored as a level value per node plus increasing thresholds:
/// D_k = {i : level_i <= tau_k}. Explicit set lists are converted to this
/// form on construction.
class Exhaustion {
public:
    static Exhaustion from_sublevels(const ScalarField& level_field,
                                     std::vector<double> thresholds);
    static Exhaustion from_sets(const DiscreteDomain& d,
                                const std::vector<std::vector<std::uint32_t>>& sets);

    std::size_t levels() const { return tau_.size(); }
    double threshold(std::size_t k) const { return tau_[k]; }
    bool contains(std::size_t k, std::uint32_t node) const {
        return level_[node] <= tau_[k];
    }
    std::vector<std::uint32_t> set(std::size_t k) const;
    std::span<const double> level_values() const { return level_; }

    /// Checks strict nesting, that D_0 contains the inner boundary, and
    /// that the last set covers every node. Throws on violation.
    void validate(const DiscreteDomain& d) const;

private:
    std::vector<double> level_;
    std::vector<double> tau_;
};

} // namespace potlab
