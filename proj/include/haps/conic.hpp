#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace haps::conic {

/// Affine functional coeff . v + constant over the flattened parameter vector.
struct Affine {
  Eigen::VectorXd coeff;
  double constant = 0.0;
  double eval(const Eigen::VectorXd& v) const { return coeff.dot(v) + constant; }
};

enum class BlockKind { hermitian, real_symmetric };

/// Convex program covering exactly the two subproblem families the algorithms
/// generate: maximize sum_t w_t log2(affine_t) + linear, over real variables
/// and PSD matrix blocks, subject to affine inequalities, second-order cones,
/// and convex quadratic constraints.
///
/// Declare all variables before creating affine terms; Affine sizes are
/// checked against the final parameter count at solve time.
class ConicProgram {
 public:
  struct PsdBlock {
    BlockKind kind;
    int dim;
    int param_offset;  // into v
    int param_count;
  };
  struct Soc {  // || [u_0 .. u_{r-1}] || <= rhs
    std::vector<Affine> u;
    Affine rhs;
  };
  struct Quad {  // v' P v + p . v + c <= 0, P PSD
    Eigen::MatrixXd p_mat;
    Eigen::VectorXd p_vec;
    double constant = 0.0;
  };
  struct LogTerm {  // weight * log2(arg)
    double weight;
    Affine arg;
  };

  int add_reals(int count);
  int add_psd_block(int dim, BlockKind kind);

  int num_params() const { return num_params_; }
  Affine affine(double constant = 0.0) const;

  /// Accumulate scale * tr(C X_block) into a; C must be Hermitian (or real
  /// symmetric for a real block).
  void add_trace_term(Affine& a, int block, const Eigen::MatrixXcd& c,
                      double scale = 1.0) const;

  void add_log2_term(double weight, Affine arg);
  void set_linear_objective(Affine a);
  void add_ineq(Affine a);  // a >= 0
  void add_soc(Soc soc);
  void add_quad(Quad q);

  const std::vector<PsdBlock>& blocks() const { return blocks_; }
  const std::vector<Affine>& ineqs() const { return ineqs_; }
  const std::vector<Soc>& socs() const { return socs_; }
  const std::vector<Quad>& quads() const { return quads_; }
  const std::vector<LogTerm>& log_terms() const { return log_terms_; }
  const Affine& linear_objective() const { return linear_obj_; }

  /// Matrix value of a PSD block at parameter vector v.
  Eigen::MatrixXcd block_value(int block, const Eigen::VectorXd& v) const;
  /// Write a (Hermitian or symmetric) matrix into the block slice of v.
  void set_block_value(int block, const Eigen::MatrixXcd& x,
                       Eigen::VectorXd& v) const;

  double objective_value(const Eigen::VectorXd& v) const;
  /// Most-negative constraint margin (>= 0 means feasible); psd blocks via
  /// min eigenvalue.
  double worst_margin(const Eigen::VectorXd& v) const;

  std::string dump() const;  // plain-text problem listing for offline checks

 private:
  int num_params_ = 0;
  std::vector<PsdBlock> blocks_;
  std::vector<Affine> ineqs_;
  std::vector<Soc> socs_;
  std::vector<Quad> quads_;
  std::vector<LogTerm> log_terms_;
  Affine linear_obj_;
};

enum class SolveStatus { optimal, infeasible, inaccurate, failed };
const char* to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::failed;
  double value = 0.0;             // objective at v
  Eigen::VectorXd v;
  double gap_bound = 0.0;         // m / t at termination
  double worst_violation = 0.0;   // primal margin deficit (0 when interior)
  int newton_steps = 0;
};

struct SolveOptions {
  double tol = 1e-8;          // absolute duality-gap target
  double mu = 10.0;           // barrier parameter growth
  int max_newton = 2000;
  std::optional<Eigen::VectorXd> initial;  // hint; psd slices must be PD
  double phase1_stop = 1e-7;  // accept interior margin this large
};

/// Default tolerance honoring the HAPSISAC_SOLVER_TOL environment variable.
double default_solver_tol();

SolveResult solve(const ConicProgram& p, const SolveOptions& opts = {});

}  // namespace haps::conic
