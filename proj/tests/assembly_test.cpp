#include "dpp/assembly.hpp"

#include <gtest/gtest.h>

#include "dpp/dofmap.hpp"
#include "dpp/mesh.hpp"

using dpp::Field;
using dpp::MixedDofMap;
using dpp::SystemMatrices;
using dpp::TriangleMesh;

namespace {

dpp::MediumParameters table_params() {
  dpp::MediumParameters p;
  p.gamma = 1.0;
  p.mu = 1.0;
  p.beta = 0.5;
  p.phi1 = 0.2;
  p.phi2 = 0.05;
  p.drag1 << 1.0, 0.1, 0.1, 0.9;
  p.drag2 << 100.0, 5.0, 5.0, 100.0;
  return p;
}

struct Problem {
  TriangleMesh mesh;
  MixedDofMap dm;
  dpp::MediumParameters params;
  SystemMatrices sys;

  Problem(int nx, int ny, dpp::MediumParameters p = table_params())
      : mesh(dpp::generate_unit_square_mesh(nx, ny)),
        dm(dpp::build_mixed_dof_map(mesh)),
        params(p),
        sys(dpp::assemble_time_invariant(mesh, dm, params,
                                         dpp::BoundaryConditionSpec::no_flow(),
                                         8)) {}
};

}  // namespace

TEST(AssembleTimeInvariant, MassBlockTotalIsDensityTimesArea) {
  Problem s(4, 4);
  // Summing every entry of the v1x mass block pairs the partition of unity
  // with itself: rho1 * |Omega|.
  Eigen::MatrixXd m11 = dpp::extract_block(s.sys.mass, s.dm, Field::V1X, Field::V1X);
  EXPECT_NEAR(m11.sum(), 0.2, 1e-12);
  Eigen::MatrixXd m2y = dpp::extract_block(s.sys.mass, s.dm, Field::V2Y, Field::V2Y);
  EXPECT_NEAR(m2y.sum(), 0.05, 1e-12);
}

TEST(AssembleTimeInvariant, MassIsZeroOnPressureRows) {
  Problem s(3, 2);
  for (int k = 0; k < s.sys.mass.outerSize(); ++k) {
    for (dpp::SparseMat::InnerIterator it(s.sys.mass, k); it; ++it) {
      EXPECT_LT(it.row(), s.dm.offset(Field::P1));
      EXPECT_LT(it.col(), s.dm.offset(Field::P1));
    }
  }
}

TEST(AssembleTimeInvariant, MassIsSymmetricPositiveDefiniteOnVelocities) {
  Problem s(2, 2);
  Eigen::MatrixXd mass = Eigen::MatrixXd(s.sys.mass);
  const int nv = 4 * s.dm.p3_scalar_count;
  Eigen::MatrixXd mv = mass.topLeftCorner(nv, nv);
  EXPECT_NEAR((mv - mv.transpose()).cwiseAbs().maxCoeff(), 0.0, 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mv);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
}

TEST(AssembleTimeInvariant, TransferBlockQuadraticForm) {
  Problem s(4, 4);
  const int np = s.dm.p1_scalar_count;
  Eigen::VectorXd state = Eigen::VectorXd::Zero(s.dm.total);

  // (p1, p2) = (1, 1) lies in the null space of the transfer block.
  state.segment(s.dm.offset(Field::P1), np).setOnes();
  state.segment(s.dm.offset(Field::P2), np).setOnes();
  EXPECT_NEAR(state.dot(s.sys.stiffness * state), 0.0, 1e-12);

  // (p1, p2) = (1, -1): (beta/mu) * integral of (p1 - p2)^2 = 0.5 * 4 = 2.
  state.segment(s.dm.offset(Field::P2), np).setConstant(-1.0);
  EXPECT_NEAR(state.dot(s.sys.stiffness * state), 2.0, 1e-12);
}

TEST(AssembleTimeInvariant, ZeroBetaDecouplesNetworkBlocks) {
  dpp::MediumParameters p = table_params();
  p.beta = 0.0;
  Problem s(3, 3, p);
  // No structural nonzero may couple a network-1 field with a network-2 field.
  auto network_of = [&](int dof) {
    if (dof < s.dm.offset(Field::V2X)) return 1;
    if (dof < s.dm.offset(Field::P1)) return 2;
    return dof < s.dm.offset(Field::P2) ? 1 : 2;
  };
  for (const dpp::SparseMat* mat : {&s.sys.mass, &s.sys.stiffness}) {
    for (int k = 0; k < mat->outerSize(); ++k) {
      for (dpp::SparseMat::InnerIterator it(*mat, k); it; ++it) {
        if (it.value() == 0.0) continue;
        EXPECT_EQ(network_of(it.row()), network_of(it.col()))
            << "coupling entry at (" << it.row() << "," << it.col() << ")";
      }
    }
  }
}

TEST(AssembleTimeInvariant, DragBlocksPositiveDefiniteOnUnconstrainedDofs) {
  Problem s(2, 2);
  dpp::ConstrainedOperator op(s.sys.stiffness, s.sys.constraints);
  std::vector<bool> constrained(s.dm.total, false);
  for (const auto& c : s.sys.constraints) constrained[c.dof] = true;

  Eigen::MatrixXd k = Eigen::MatrixXd(op.matrix());
  // Velocity-velocity sub-block over unconstrained DOFs, both networks.
  std::vector<int> keep;
  for (int i = 0; i < s.dm.offset(Field::P1); ++i) {
    if (!constrained[i]) keep.push_back(i);
  }
  Eigen::MatrixXd sub(keep.size(), keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    for (std::size_t c = 0; c < keep.size(); ++c) sub(r, c) = k(keep[r], keep[c]);
  }
  EXPECT_NEAR((sub - sub.transpose()).cwiseAbs().maxCoeff(), 0.0, 1e-13);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
}

TEST(AssembleRhs, ConstantForceAgainstPartitionOfUnity) {
  Problem s(4, 4);
  dpp::BodyForceSpec case2{dpp::Expression::parse("0"),
                           dpp::Expression::parse("-10")};
  Eigen::VectorXd rhs = dpp::assemble_rhs(
      s.mesh, s.dm, s.params, dpp::Forcing::from_body_force(case2), 1.0, 8);
  const int n3 = s.dm.p3_scalar_count;
  EXPECT_NEAR(rhs.segment(s.dm.offset(Field::V1Y), n3).sum(), -2.0, 1e-12);
  EXPECT_NEAR(rhs.segment(s.dm.offset(Field::V1X), n3).sum(), 0.0, 1e-14);
  EXPECT_NEAR(rhs.segment(s.dm.offset(Field::V2Y), n3).sum(), -0.5, 1e-12);
  // Pressure rows carry no load in physical runs.
  EXPECT_EQ(rhs.segment(s.dm.offset(Field::P1), 2 * s.dm.p1_scalar_count).norm(), 0.0);
}

TEST(AssembleRhs, ZeroAndVanishingForces) {
  Problem s(2, 3);
  dpp::BodyForceSpec zero{dpp::Expression::parse("0"), dpp::Expression::parse("0")};
  EXPECT_EQ(dpp::assemble_rhs(s.mesh, s.dm, s.params,
                              dpp::Forcing::from_body_force(zero), 0.5, 8)
                .norm(),
            0.0);

  // The oscillatory force vanishes identically at t = 0.
  dpp::BodyForceSpec case1{dpp::Expression::parse("10*sin(pi*x*t)"),
                           dpp::Expression::parse("5*sin(2*pi*x*y*t)")};
  Eigen::VectorXd rhs = dpp::assemble_rhs(
      s.mesh, s.dm, s.params, dpp::Forcing::from_body_force(case1), 0.0, 8);
  EXPECT_NEAR(rhs.norm(), 0.0, 1e-13);
}

TEST(Constraints, NoFlowCountsPerSide) {
  TriangleMesh mesh = dpp::generate_unit_square_mesh(20, 20);
  MixedDofMap dm = dpp::build_mixed_dof_map(mesh);
  for (dpp::Side side : dpp::kAllSides) {
    // 21 vertex nodes + 40 edge nodes per side.
    EXPECT_EQ(dpp::boundary_p3_dofs_on_side(mesh, dm, side).size(), 61u);
  }
  auto constraints = dpp::build_constraints(
      mesh, dm, table_params(), dpp::BoundaryConditionSpec::no_flow(), {});
  // Per network: 2*61 horizontal-normal + 2*61 vertical-normal DOFs, no
  // duplicates (opposite sides share no nodes); plus the single pressure pin.
  EXPECT_EQ(constraints.size(), 2u * 4u * 61u + 1u);
  for (const auto& c : constraints) EXPECT_EQ(c.value(0.37), 0.0);
}

TEST(Constraints, PinVertexAndBetaZeroSecondPin) {
  TriangleMesh mesh = dpp::generate_unit_square_mesh(3, 3);
  MixedDofMap dm = dpp::build_mixed_dof_map(mesh);
  dpp::MediumParameters p = table_params();

  auto constraints = dpp::build_constraints(
      mesh, dm, p, dpp::BoundaryConditionSpec::no_flow(), {});
  const int pin_dof = dm.global(Field::P1, 0);  // vertex 0 is the origin
  int pins = 0;
  for (const auto& c : constraints) pins += c.dof == pin_dof;
  EXPECT_EQ(pins, 1);
  int p2_pins = 0;
  for (const auto& c : constraints) p2_pins += c.dof >= dm.offset(Field::P2);
  EXPECT_EQ(p2_pins, 0);

  p.beta = 0.0;
  auto constraints0 = dpp::build_constraints(
      mesh, dm, p, dpp::BoundaryConditionSpec::no_flow(), {});
  int p2_pins0 = 0;
  for (const auto& c : constraints0) p2_pins0 += c.dof == dm.global(Field::P2, 0);
  EXPECT_EQ(p2_pins0, 1);
}

TEST(Constraints, PressureSideSuppressesPin) {
  TriangleMesh mesh = dpp::generate_unit_square_mesh(3, 3);
  MixedDofMap dm = dpp::build_mixed_dof_map(mesh);
  dpp::BoundaryConditionSpec bcs = dpp::BoundaryConditionSpec::no_flow();
  bcs.at(dpp::Side::Left, 1) = {dpp::BoundaryKind::Pressure,
                                dpp::Expression::parse("1+t")};
  auto constraints = dpp::build_constraints(mesh, dm, table_params(), bcs, {});
  int pressure_constraints = 0;
  for (const auto& c : constraints) {
    if (c.dof >= dm.offset(Field::P1)) {
      ++pressure_constraints;
      EXPECT_DOUBLE_EQ(c.value(2.0), 3.0);
    }
  }
  EXPECT_EQ(pressure_constraints, 4);  // the 4 left-side vertices, no pin
}

TEST(ConstrainedOperatorTest, EliminationAndRhsCorrection) {
  // Small dense-checkable system: 3 DOFs, constrain dof 1 to value 5.
  std::vector<Eigen::Triplet<double>> trip = {
      {0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 3.0}, {1, 2, 1.0},
      {2, 1, 1.0}, {2, 2, 4.0}};
  dpp::SparseMat a(3, 3);
  a.setFromTriplets(trip.begin(), trip.end());
  std::vector<dpp::Constraint> cs = {{1, [](double) { return 5.0; }}};
  dpp::ConstrainedOperator op(a, cs);

  Eigen::MatrixXd expected(3, 3);
  expected << 2, 0, 0, 0, 1, 0, 0, 0, 4;
  EXPECT_TRUE(Eigen::MatrixXd(op.matrix()).isApprox(expected));

  Eigen::VectorXd rhs(3);
  rhs << 1.0, 2.0, 3.0;
  op.apply_to_rhs(rhs, 0.0);
  EXPECT_DOUBLE_EQ(rhs[0], 1.0 - 5.0);
  EXPECT_DOUBLE_EQ(rhs[1], 5.0);
  EXPECT_DOUBLE_EQ(rhs[2], 3.0 - 5.0);

  // Solving reproduces the constrained solution of the original system.
  dpp::SparseFactorization lu(op.matrix());
  Eigen::VectorXd x = lu.solve(rhs);
  EXPECT_DOUBLE_EQ(x[1], 5.0);
  EXPECT_NEAR(2 * x[0] + 1 * 5.0, 1.0, 1e-14);
  EXPECT_NEAR(1 * 5.0 + 4 * x[2], 3.0, 1e-14);
}

TEST(SparseFactorizationTest, SolvesToDirectPrecision) {
  Problem s(4, 4);
  dpp::SparseMat op_matrix = s.sys.stiffness + s.sys.mass / 1e-3;
  dpp::ConstrainedOperator op(op_matrix, s.sys.constraints);
  dpp::SparseFactorization lu(op.matrix());
  Eigen::VectorXd x_ref(s.dm.total);
  for (int i = 0; i < x_ref.size(); ++i) x_ref[i] = std::cos(0.13 * i);
  Eigen::VectorXd b = op.matrix() * x_ref;
  Eigen::VectorXd x = lu.solve(b);
  EXPECT_LE((op.matrix() * x - b).norm() / b.norm(), 1e-10);
}

TEST(SparseFactorizationTest, DetectsMissingPressurePin) {
  // With beta = 0 and only one pressure pinned, p2 = const is a null vector.
  dpp::MediumParameters p = table_params();
  p.beta = 0.0;
  TriangleMesh mesh = dpp::generate_unit_square_mesh(4, 4);
  MixedDofMap dm = dpp::build_mixed_dof_map(mesh);
  SystemMatrices sys = dpp::assemble_time_invariant(
      mesh, dm, p, dpp::BoundaryConditionSpec::no_flow(), 8);

  std::vector<dpp::Constraint> without_p2_pin;
  for (const auto& c : sys.constraints) {
    if (c.dof < dm.offset(Field::P2)) without_p2_pin.push_back(c);
  }
  ASSERT_EQ(without_p2_pin.size(), sys.constraints.size() - 1);

  dpp::SparseMat op_matrix = sys.stiffness + sys.mass / 1e-3;
  dpp::ConstrainedOperator op(op_matrix, without_p2_pin);
  EXPECT_THROW(dpp::SparseFactorization{op.matrix()},
               dpp::SingularSystemError);

  // The complete constraint set factorizes fine.
  dpp::ConstrainedOperator full(op_matrix, sys.constraints);
  EXPECT_NO_THROW(dpp::SparseFactorization{full.matrix()});
}

TEST(GreensIdentity, PressureGradientBlockIsNegativeDivergenceTransposed) {
  // With all-homogeneous velocity constraints eliminated, the assembled
  // phi grad(p).w block must equal minus the transpose of the phi div(v) q
  // block entry for entry (the boundary terms all vanish).
  Problem s(3, 2);
  dpp::ConstrainedOperator op(s.sys.stiffness, s.sys.constraints);
  for (int network : {1, 2}) {
    auto [fx, fy] = dpp::velocity_fields(network);
    Field fp = dpp::pressure_field(network);
    for (Field fv : {fx, fy}) {
      Eigen::MatrixXd b = dpp::extract_block(op.matrix(), s.dm, fv, fp);
      Eigen::MatrixXd c = dpp::extract_block(op.matrix(), s.dm, fp, fv);
      EXPECT_LE((b + c.transpose()).cwiseAbs().maxCoeff(), 1e-12)
          << "network " << network;
    }
  }
  // Cross-network coupling blocks are empty.
  Eigen::MatrixXd cross =
      dpp::extract_block(op.matrix(), s.dm, Field::V1X, Field::P2);
  EXPECT_EQ(cross.cwiseAbs().maxCoeff(), 0.0);
}
