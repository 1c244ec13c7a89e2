#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <functional>
#include <set>
#include <vector>

#include "dpp/dofmap.hpp"
#include "dpp/errors.hpp"
#include "dpp/mesh.hpp"
#include "dpp/model.hpp"

namespace dpp {

using SparseMat = Eigen::SparseMatrix<double>;

/// One essential constraint: the DOF holds value(t) at time t.
struct Constraint {
  int dof = -1;
  std::function<double(double)> value;
};

/// Point constraint removing the constant pressure null space. A negative
/// vertex index selects the vertex nearest the origin. With beta = 0 the
/// networks decouple and the other network is pinned too, at `other_value`.
struct PinConfig {
  int network = 1;
  int vertex = -1;
  double value = 0.0;
  double other_value = 0.0;
};

/// The time-invariant discrete operators. `mass` carries the density-weighted
/// velocity blocks and is identically zero on pressure DOFs; `stiffness`
/// carries drag, pressure-gradient, divergence and inter-network transfer
/// blocks. Constraints list every essential condition with its value provider.
struct SystemMatrices {
  SparseMat mass;
  SparseMat stiffness;
  std::vector<Constraint> constraints;
};

/// Right-hand-side providers: the specific body force per network and the
/// mass sources g1, g2. Null providers mean identically zero; physical runs
/// use zero mass sources (they exist for manufactured solutions).
struct Forcing {
  std::function<Eigen::Vector2d(double, double, double)> b1;
  std::function<Eigen::Vector2d(double, double, double)> b2;
  std::function<double(double, double, double)> g1;
  std::function<double(double, double, double)> g2;

  static Forcing from_body_force(const BodyForceSpec& spec) {
    Forcing f;
    auto b = [spec](double x, double y, double t) {
      return eval_body_force(spec, x, y, t);
    };
    f.b1 = b;
    f.b2 = b;
    return f;
  }
};

/// Scalar cubic DOFs lying on one side of the square (vertex and edge nodes
/// of the side's boundary facets), in increasing index order.
inline std::vector<int> boundary_p3_dofs_on_side(const TriangleMesh& mesh,
                                                 const MixedDofMap& dm,
                                                 Side side) {
  std::set<int> dofs;
  const int nv = dm.p1_scalar_count;  // vertex DOFs lead the cubic layout
  for (const auto& facet : mesh.boundary_facets) {
    if (facet.side != side) continue;
    dofs.insert(mesh.edges[facet.edge][0]);
    dofs.insert(mesh.edges[facet.edge][1]);
    dofs.insert(nv + 2 * facet.edge);
    dofs.insert(nv + 2 * facet.edge + 1);
  }
  return {dofs.begin(), dofs.end()};
}

inline int pin_vertex_nearest_origin(const TriangleMesh& mesh) {
  int best = 0;
  double best_d = mesh.vertices[0].squaredNorm();
  for (int v = 1; v < mesh.vertex_count(); ++v) {
    double d = mesh.vertices[v].squaredNorm();
    if (d < best_d) {
      best = v;
      best_d = d;
    }
  }
  return best;
}

/// Builds the essential constraint list: component-wise normal-velocity
/// values on velocity sides (vx on left/right, vy on bottom/top, so corners
/// shared by two velocity sides are fixed in both components), pressure
/// values on pressure sides, and the pressure pin. With beta > 0 the transfer
/// block couples the pressures and a single pin removes the joint constant
/// mode; with beta = 0 each network lacking a pressure condition gets its own
/// pin at the same vertex. Networks with a pressure side need no pin.
inline std::vector<Constraint> build_constraints(const TriangleMesh& mesh,
                                                 const MixedDofMap& dm,
                                                 const MediumParameters& params,
                                                 const BoundaryConditionSpec& bcs,
                                                 const PinConfig& pin = {}) {
  std::vector<Constraint> out;
  std::set<int> seen;
  auto add = [&](int dof, std::function<double(double)> value) {
    if (seen.insert(dof).second) out.push_back({dof, std::move(value)});
  };

  for (Side side : kAllSides) {
    const bool horizontal_normal = side == Side::Left || side == Side::Right;
    const double sign = horizontal_normal ? side_normal(side).x()
                                          : side_normal(side).y();
    for (int network : {1, 2}) {
      const BoundaryCondition& bc = bcs.at(side, network);
      if (bc.kind == BoundaryKind::NormalVelocity) {
        auto [fx, fy] = velocity_fields(network);
        Field field = horizontal_normal ? fx : fy;
        for (int s : boundary_p3_dofs_on_side(mesh, dm, side)) {
          Eigen::Vector2d node = dm.p3_nodes[s];
          Expression expr = bc.value;
          add(dm.global(field, s), [expr, sign, node](double t) {
            return sign * expr.eval(node.x(), node.y(), t);
          });
        }
      } else {
        Field field = pressure_field(network);
        for (const auto& facet : mesh.boundary_facets) {
          if (facet.side != side) continue;
          for (int v : mesh.edges[facet.edge]) {
            Eigen::Vector2d node = mesh.vertices[v];
            Expression expr = bc.value;
            add(dm.global(field, v), [expr, node](double t) {
              return expr.eval(node.x(), node.y(), t);
            });
          }
        }
      }
    }
  }

  const int vertex = pin.vertex >= 0 ? pin.vertex : pin_vertex_nearest_origin(mesh);
  if (vertex >= mesh.vertex_count()) throw Error("pin vertex out of range");
  auto add_pin = [&](int network) {
    const double value = network == pin.network ? pin.value : pin.other_value;
    add(dm.global(pressure_field(network), vertex),
        [value](double) { return value; });
  };
  if (params.beta > 0.0) {
    if (!bcs.has_pressure_condition(1) && !bcs.has_pressure_condition(2)) {
      add_pin(pin.network);
    }
  } else {
    for (int network : {1, 2}) {
      if (!bcs.has_pressure_condition(network)) add_pin(network);
    }
  }
  return out;
}

/// Assembles the coupled weak form. For trial/test velocities w and
/// pressures q in the same C0 spaces, without integration by parts anywhere:
///
///   rho_i dv_i/dt . w_i + mu phi_i^2 (K_i^-1 v_i) . w_i
///     + phi_i grad(p_i) . w_i                      = rho_i b . w_i
///   phi_1 div(v_1) q_1 + (beta/mu)(p_1 - p_2) q_1  = g_1 q_1
///   phi_2 div(v_2) q_2 - (beta/mu)(p_1 - p_2) q_2  = g_2 q_2
///
/// all integrated over the domain with the given quadrature degree.
inline SystemMatrices assemble_time_invariant(const TriangleMesh& mesh,
                                              const MixedDofMap& dm,
                                              const MediumParameters& params,
                                              const BoundaryConditionSpec& bcs,
                                              int quadrature_degree = 8,
                                              const PinConfig& pin = {}) {
  detail::ShapeTables tables(quadrature_degree);
  const int nq = tables.rule.size();
  static const Eigen::Vector2d ref_grad_p1[3] = {{-1, -1}, {1, 0}, {0, 1}};

  std::vector<Eigen::Triplet<double>> mass_trip;
  std::vector<Eigen::Triplet<double>> stiff_trip;
  mass_trip.reserve(mesh.triangle_count() * 400);
  stiff_trip.reserve(mesh.triangle_count() * 1100);
  auto push = [](std::vector<Eigen::Triplet<double>>& trip, int r, int c,
                 double v) {
    if (v != 0.0) trip.emplace_back(r, c, v);
  };

  const double beta_mu = params.beta / params.mu;
  std::vector<std::array<Eigen::Vector2d, 10>> grads(nq);

  for (int t = 0; t < mesh.triangle_count(); ++t) {
    AffineMap map = affine_map(mesh, t);
    for (int q = 0; q < nq; ++q) {
      for (int a = 0; a < 10; ++a) {
        grads[q][a] = map.inverse_transpose * tables.p3_ref_grads[q][a];
      }
    }
    Eigen::Vector2d grad_p1[3];
    for (int m = 0; m < 3; ++m) {
      grad_p1[m] = map.inverse_transpose * ref_grad_p1[m];
    }

    // Element integrals: cubic mass, cubic basis integrals, divergence
    // couplings and the linear mass.
    Eigen::Matrix<double, 10, 10> mv = Eigen::Matrix<double, 10, 10>::Zero();
    Eigen::Matrix<double, 10, 1> int_n = Eigen::Matrix<double, 10, 1>::Zero();
    Eigen::Matrix<double, 3, 10> cx = Eigen::Matrix<double, 3, 10>::Zero();
    Eigen::Matrix<double, 3, 10> cy = Eigen::Matrix<double, 3, 10>::Zero();
    Eigen::Matrix3d mp = Eigen::Matrix3d::Zero();
    for (int q = 0; q < nq; ++q) {
      const double w = tables.rule.weights[q] * map.det;
      const auto& n = tables.p3_values[q];
      const auto& l = tables.p1_values[q];
      for (int a = 0; a < 10; ++a) {
        int_n[a] += w * n[a];
        for (int b = 0; b <= a; ++b) mv(a, b) += w * n[a] * n[b];
        for (int m = 0; m < 3; ++m) {
          cx(m, a) += w * l[m] * grads[q][a].x();
          cy(m, a) += w * l[m] * grads[q][a].y();
        }
      }
      for (int m = 0; m < 3; ++m) {
        for (int k = 0; k <= m; ++k) mp(m, k) += w * l[m] * l[k];
      }
    }
    mv.triangularView<Eigen::StrictlyUpper>() =
        mv.triangularView<Eigen::StrictlyLower>().transpose();
    mp.triangularView<Eigen::StrictlyUpper>() =
        mp.triangularView<Eigen::StrictlyLower>().transpose();

    const auto& p3 = dm.element_p3[t];
    const auto& p1 = mesh.triangles[t];

    for (int network : {1, 2}) {
      const double rho = params.rho(network);
      const double phi = params.phi(network);
      const Eigen::Matrix2d drag = phi * phi * params.drag(network);
      auto [fx, fy] = velocity_fields(network);
      const Field fp = pressure_field(network);

      for (int a = 0; a < 10; ++a) {
        const int gxa = dm.global(fx, p3[a]);
        const int gya = dm.global(fy, p3[a]);
        for (int b = 0; b < 10; ++b) {
          const int gxb = dm.global(fx, p3[b]);
          const int gyb = dm.global(fy, p3[b]);
          push(mass_trip, gxa, gxb, rho * mv(a, b));
          push(mass_trip, gya, gyb, rho * mv(a, b));
          push(stiff_trip, gxa, gxb, drag(0, 0) * mv(a, b));
          push(stiff_trip, gxa, gyb, drag(0, 1) * mv(a, b));
          push(stiff_trip, gya, gxb, drag(1, 0) * mv(a, b));
          push(stiff_trip, gya, gyb, drag(1, 1) * mv(a, b));
        }
        for (int m = 0; m < 3; ++m) {
          const int gm = dm.global(fp, p1[m]);
          // B block: phi grad(p) . w ; C block: phi div(v) q.
          push(stiff_trip, gxa, gm, phi * grad_p1[m].x() * int_n[a]);
          push(stiff_trip, gya, gm, phi * grad_p1[m].y() * int_n[a]);
          push(stiff_trip, gm, gxa, phi * cx(m, a));
          push(stiff_trip, gm, gya, phi * cy(m, a));
        }
      }
    }

    if (beta_mu > 0.0) {
      for (int m = 0; m < 3; ++m) {
        const int g1m = dm.global(Field::P1, p1[m]);
        const int g2m = dm.global(Field::P2, p1[m]);
        for (int k = 0; k < 3; ++k) {
          const double e = beta_mu * mp(m, k);
          push(stiff_trip, g1m, dm.global(Field::P1, p1[k]), e);
          push(stiff_trip, g1m, dm.global(Field::P2, p1[k]), -e);
          push(stiff_trip, g2m, dm.global(Field::P1, p1[k]), -e);
          push(stiff_trip, g2m, dm.global(Field::P2, p1[k]), e);
        }
      }
    }
  }

  SystemMatrices sys;
  sys.mass.resize(dm.total, dm.total);
  sys.stiffness.resize(dm.total, dm.total);
  sys.mass.setFromTriplets(mass_trip.begin(), mass_trip.end());
  sys.stiffness.setFromTriplets(stiff_trip.begin(), stiff_trip.end());
  sys.mass.makeCompressed();
  sys.stiffness.makeCompressed();
  sys.constraints = build_constraints(mesh, dm, params, bcs, pin);
  return sys;
}

/// Load vector at time t: velocity rows get rho_i b_i . w, pressure rows get
/// g_i q (zero when the provider is absent).
inline Eigen::VectorXd assemble_rhs(const TriangleMesh& mesh,
                                    const MixedDofMap& dm,
                                    const MediumParameters& params,
                                    const Forcing& forcing, double t,
                                    int quadrature_degree = 8) {
  detail::ShapeTables tables(quadrature_degree);
  const int nq = tables.rule.size();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dm.total);

  for (int e = 0; e < mesh.triangle_count(); ++e) {
    AffineMap map = affine_map(mesh, e);
    const auto& p3 = dm.element_p3[e];
    const auto& p1 = mesh.triangles[e];
    for (int q = 0; q < nq; ++q) {
      const double w = tables.rule.weights[q] * map.det;
      const Eigen::Vector2d x = map_to_physical(mesh, e, tables.rule.points[q]);
      for (int network : {1, 2}) {
        const auto& b = network == 1 ? forcing.b1 : forcing.b2;
        if (b) {
          const Eigen::Vector2d bv = params.rho(network) * b(x.x(), x.y(), t);
          if (bv.x() != 0.0 || bv.y() != 0.0) {
            auto [fx, fy] = velocity_fields(network);
            for (int a = 0; a < 10; ++a) {
              const double wn = w * tables.p3_values[q][a];
              rhs[dm.global(fx, p3[a])] += wn * bv.x();
              rhs[dm.global(fy, p3[a])] += wn * bv.y();
            }
          }
        }
        const auto& g = network == 1 ? forcing.g1 : forcing.g2;
        if (g) {
          const double gv = g(x.x(), x.y(), t);
          if (gv != 0.0) {
            const Field fp = pressure_field(network);
            for (int m = 0; m < 3; ++m) {
              rhs[dm.global(fp, p1[m])] += w * tables.p1_values[q][m] * gv;
            }
          }
        }
      }
    }
  }
  return rhs;
}

/// Linear-pressure mass matrix over the mesh vertices (used for the
/// algebraically consistent pressure initialization).
inline SparseMat assemble_p1_mass(const TriangleMesh& mesh, int quadrature_degree = 4) {
  detail::ShapeTables tables(quadrature_degree);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.triangle_count() * 9);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    AffineMap map = affine_map(mesh, t);
    Eigen::Matrix3d mp = Eigen::Matrix3d::Zero();
    for (int q = 0; q < tables.rule.size(); ++q) {
      const double w = tables.rule.weights[q] * map.det;
      const auto& l = tables.p1_values[q];
      for (int m = 0; m < 3; ++m) {
        for (int k = 0; k < 3; ++k) mp(m, k) += w * l[m] * l[k];
      }
    }
    const auto& tri = mesh.triangles[t];
    for (int m = 0; m < 3; ++m) {
      for (int k = 0; k < 3; ++k) trip.emplace_back(tri[m], tri[k], mp(m, k));
    }
  }
  SparseMat out(mesh.vertex_count(), mesh.vertex_count());
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  return out;
}

/// Symmetric-style elimination of essential constraints: constrained rows and
/// columns are replaced by identity, and the original column entries are kept
/// so prescribed values can be moved to the right-hand side at any time.
class ConstrainedOperator {
 public:
  ConstrainedOperator(const SparseMat& matrix,
                      const std::vector<Constraint>& constraints)
      : constraints_(constraints) {
    const int n = static_cast<int>(matrix.rows());
    std::vector<int> slot(n, -1);
    for (int j = 0; j < static_cast<int>(constraints_.size()); ++j) {
      if (constraints_[j].dof < 0 || constraints_[j].dof >= n) {
        throw Error("constraint DOF out of range");
      }
      slot[constraints_[j].dof] = j;
    }

    std::vector<Eigen::Triplet<double>> kept;
    std::vector<Eigen::Triplet<double>> cols;
    kept.reserve(matrix.nonZeros());
    for (int k = 0; k < matrix.outerSize(); ++k) {
      for (SparseMat::InnerIterator it(matrix, k); it; ++it) {
        const int r = static_cast<int>(it.row());
        const int c = static_cast<int>(it.col());
        if (slot[r] >= 0) continue;
        if (slot[c] >= 0) {
          cols.emplace_back(r, slot[c], it.value());
        } else {
          kept.emplace_back(r, c, it.value());
        }
      }
    }
    for (const auto& con : constraints_) kept.emplace_back(con.dof, con.dof, 1.0);

    eliminated_.resize(n, n);
    eliminated_.setFromTriplets(kept.begin(), kept.end());
    eliminated_.makeCompressed();
    bound_columns_.resize(n, static_cast<int>(constraints_.size()));
    bound_columns_.setFromTriplets(cols.begin(), cols.end());
    bound_columns_.makeCompressed();
  }

  const SparseMat& matrix() const { return eliminated_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }

  Eigen::VectorXd constraint_values(double t) const {
    Eigen::VectorXd vals(constraints_.size());
    for (int j = 0; j < static_cast<int>(constraints_.size()); ++j) {
      vals[j] = constraints_[j].value(t);
    }
    return vals;
  }

  /// Moves prescribed values into the right-hand side and overwrites the
  /// constrained entries with the values themselves.
  void apply_to_rhs(Eigen::VectorXd& rhs, double t) const {
    const Eigen::VectorXd vals = constraint_values(t);
    rhs -= bound_columns_ * vals;
    for (int j = 0; j < static_cast<int>(constraints_.size()); ++j) {
      rhs[constraints_[j].dof] = vals[j];
    }
  }

 private:
  std::vector<Constraint> constraints_;
  SparseMat eliminated_;
  SparseMat bound_columns_;
};

/// Sparse LU factorization, reusable across time steps. On top of Eigen's
/// structural checks, a short inverse iteration estimates the condition
/// number, so a numerically rank-deficient matrix (for example a missing
/// pressure pin) is reported instead of silently producing garbage; exactly
/// singular systems land many orders of magnitude above the threshold.
class SparseFactorization {
 public:
  explicit SparseFactorization(const SparseMat& matrix) {
    lu_.analyzePattern(matrix);
    lu_.factorize(matrix);
    if (lu_.info() != Eigen::Success) {
      throw SingularSystemError("sparse LU factorization failed: " +
                                lu_.lastErrorMessage());
    }
    double max_entry = 0.0;
    for (int k = 0; k < matrix.outerSize(); ++k) {
      for (SparseMat::InnerIterator it(matrix, k); it; ++it) {
        max_entry = std::max(max_entry, std::abs(it.value()));
      }
    }
    Eigen::VectorXd y(matrix.rows());
    for (int i = 0; i < y.size(); ++i) y[i] = 1.5 + std::sin(0.7 * i + 0.3);
    y.normalize();
    double growth = 0.0;
    for (int iter = 0; iter < 2; ++iter) {
      Eigen::VectorXd z = lu_.solve(y);
      if (!z.allFinite()) {
        throw SingularSystemError("matrix is numerically singular");
      }
      growth = z.norm();
      y = z / growth;
    }
    const double cond_estimate = growth * max_entry;
    if (cond_estimate > 1e13) {
      char msg[128];
      std::snprintf(msg, sizeof msg,
                    "matrix is numerically singular "
                    "(condition estimate %.3e)",
                    cond_estimate);
      throw SingularSystemError(msg);
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x = lu_.solve(rhs);
    if (lu_.info() != Eigen::Success) {
      throw SingularSystemError("sparse LU solve failed");
    }
    return x;
  }

 private:
  Eigen::SparseLU<SparseMat> lu_;
};

/// Dense copy of the (row_field, col_field) block of a system matrix.
inline Eigen::MatrixXd extract_block(const SparseMat& matrix,
                                     const MixedDofMap& dm, Field row_field,
                                     Field col_field) {
  Eigen::MatrixXd block =
      Eigen::MatrixXd::Zero(dm.field_size(row_field), dm.field_size(col_field));
  const int r0 = dm.offset(row_field);
  const int c0 = dm.offset(col_field);
  for (int k = 0; k < matrix.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(matrix, k); it; ++it) {
      const int r = static_cast<int>(it.row()) - r0;
      const int c = static_cast<int>(it.col()) - c0;
      if (r >= 0 && r < block.rows() && c >= 0 && c < block.cols()) {
        block(r, c) = it.value();
      }
    }
  }
  return block;
}

}  // namespace dpp
