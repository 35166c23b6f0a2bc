#include "haps/conic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace haps::conic {

namespace {
constexpr double kLn2 = std::numbers::ln2;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::inaccurate: return "inaccurate";
    case SolveStatus::failed: return "failed";
  }
  return "unknown";
}

double default_solver_tol() {
  if (const char* env = std::getenv("HAPSISAC_SOLVER_TOL")) {
    const double tol = std::atof(env);
    if (tol > 0) return tol;
  }
  return 1e-8;
}

// ---------------------------------------------------------------------------
// Program construction

int ConicProgram::add_reals(int count) {
  const int first = num_params_;
  num_params_ += count;
  return first;
}

int ConicProgram::add_psd_block(int dim, BlockKind kind) {
  PsdBlock b;
  b.kind = kind;
  b.dim = dim;
  b.param_offset = num_params_;
  b.param_count =
      kind == BlockKind::hermitian ? dim * dim : dim * (dim + 1) / 2;
  num_params_ += b.param_count;
  blocks_.push_back(b);
  return static_cast<int>(blocks_.size()) - 1;
}

Affine ConicProgram::affine(double constant) const {
  Affine a;
  a.coeff = Eigen::VectorXd::Zero(num_params_);
  a.constant = constant;
  return a;
}

namespace {

// Chart for a PSD block: per parameter, the entries (i, j, w) of its basis
// matrix, meaning X += w * e_i e_j^T. Hermitian blocks store diag params
// first, then (re, im) per upper-triangle entry; real blocks drop the im.
struct BasisEntry {
  int i, j;
  std::complex<double> w;
};
using ParamBasis = std::vector<BasisEntry>;

std::vector<ParamBasis> block_basis(const ConicProgram::PsdBlock& b) {
  std::vector<ParamBasis> basis;
  basis.reserve(b.param_count);
  for (int d = 0; d < b.dim; ++d) basis.push_back({{d, d, {1.0, 0.0}}});
  for (int i = 0; i < b.dim; ++i) {
    for (int j = i + 1; j < b.dim; ++j) {
      basis.push_back({{i, j, {1.0, 0.0}}, {j, i, {1.0, 0.0}}});
      if (b.kind == BlockKind::hermitian)
        basis.push_back({{i, j, {0.0, 1.0}}, {j, i, {0.0, -1.0}}});
    }
  }
  return basis;
}

}  // namespace

void ConicProgram::add_trace_term(Affine& a, int block, const Eigen::MatrixXcd& c,
                                  double scale) const {
  const PsdBlock& b = blocks_.at(block);
  if (c.rows() != b.dim || c.cols() != b.dim)
    throw std::invalid_argument("add_trace_term: dimension mismatch");
  const auto basis = block_basis(b);
  for (int p = 0; p < b.param_count; ++p) {
    double coeff = 0.0;
    for (const auto& e : basis[p]) coeff += (e.w * c(e.j, e.i)).real();
    a.coeff(b.param_offset + p) += scale * coeff;
  }
}

void ConicProgram::add_log2_term(double weight, Affine arg) {
  log_terms_.push_back({weight, std::move(arg)});
}
void ConicProgram::set_linear_objective(Affine a) { linear_obj_ = std::move(a); }
void ConicProgram::add_ineq(Affine a) { ineqs_.push_back(std::move(a)); }
void ConicProgram::add_soc(Soc soc) { socs_.push_back(std::move(soc)); }
void ConicProgram::add_quad(Quad q) { quads_.push_back(std::move(q)); }

Eigen::MatrixXcd ConicProgram::block_value(int block,
                                           const Eigen::VectorXd& v) const {
  const PsdBlock& b = blocks_.at(block);
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(b.dim, b.dim);
  const auto basis = block_basis(b);
  for (int p = 0; p < b.param_count; ++p)
    for (const auto& e : basis[p]) x(e.i, e.j) += e.w * v(b.param_offset + p);
  return x;
}

void ConicProgram::set_block_value(int block, const Eigen::MatrixXcd& x,
                                   Eigen::VectorXd& v) const {
  const PsdBlock& b = blocks_.at(block);
  int p = b.param_offset;
  for (int d = 0; d < b.dim; ++d) v(p++) = x(d, d).real();
  for (int i = 0; i < b.dim; ++i) {
    for (int j = i + 1; j < b.dim; ++j) {
      v(p++) = x(i, j).real();
      if (b.kind == BlockKind::hermitian) v(p++) = x(i, j).imag();
    }
  }
}

double ConicProgram::objective_value(const Eigen::VectorXd& v) const {
  double obj = linear_obj_.coeff.size() ? linear_obj_.eval(v) : 0.0;
  for (const auto& t : log_terms_) obj += t.weight * std::log2(t.arg.eval(v));
  return obj;
}

double ConicProgram::worst_margin(const Eigen::VectorXd& v) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& a : ineqs_) m = std::min(m, a.eval(v));
  for (const auto& s : socs_) {
    double nrm2 = 0.0;
    for (const auto& u : s.u) {
      const double val = u.eval(v);
      nrm2 += val * val;
    }
    m = std::min(m, s.rhs.eval(v) - std::sqrt(nrm2));
  }
  for (const auto& q : quads_) {
    const double val = v.dot(q.p_mat * v) + q.p_vec.dot(v) + q.constant;
    m = std::min(m, -val);
  }
  for (size_t b = 0; b < blocks_.size(); ++b) {
    const Eigen::MatrixXcd x = block_value(static_cast<int>(b), v);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(x, Eigen::EigenvaluesOnly);
    m = std::min(m, es.eigenvalues().minCoeff());
  }
  return m;
}

std::string ConicProgram::dump() const {
  std::ostringstream os;
  os << "conic program: params=" << num_params_ << " blocks=" << blocks_.size()
     << " ineqs=" << ineqs_.size() << " socs=" << socs_.size()
     << " quads=" << quads_.size() << " log-terms=" << log_terms_.size() << "\n";
  auto aff = [&](const Affine& a) {
    std::ostringstream t;
    bool first = true;
    for (int i = 0; i < a.coeff.size(); ++i) {
      if (a.coeff(i) == 0.0) continue;
      t << (first ? "" : " + ") << a.coeff(i) << "*v" << i;
      first = false;
    }
    t << (first ? "" : " + ") << a.constant;
    return t.str();
  };
  for (size_t b = 0; b < blocks_.size(); ++b)
    os << "  block " << b << ": "
       << (blocks_[b].kind == BlockKind::hermitian ? "hermitian" : "symmetric")
       << " dim " << blocks_[b].dim << " >= 0\n";
  os << "  maximize ";
  for (const auto& t : log_terms_) os << t.weight << "*log2(" << aff(t.arg) << ") + ";
  os << (linear_obj_.coeff.size() ? aff(linear_obj_) : std::string("0")) << "\n";
  for (const auto& a : ineqs_) os << "  " << aff(a) << " >= 0\n";
  for (const auto& s : socs_) {
    os << "  || (";
    for (size_t i = 0; i < s.u.size(); ++i) os << (i ? ", " : "") << aff(s.u[i]);
    os << ") || <= " << aff(s.rhs) << "\n";
  }
  for (const auto& q : quads_)
    os << "  quad(" << q.p_mat.rows() << "x" << q.p_mat.cols() << ") + "
       << aff({q.p_vec, q.constant}) << " <= 0\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Barrier solver

namespace {

struct BlockCache {
  std::vector<ParamBasis> basis;
  Eigen::MatrixXcd x;
  Eigen::MatrixXcd y;  // X^{-1}
  bool pd = false;
};

class BarrierProblem {
 public:
  BarrierProblem(const ConicProgram& p, bool use_objective)
      : p_(p), use_objective_(use_objective) {
    for (const auto& b : p.blocks()) {
      BlockCache c;
      c.basis = block_basis(b);
      caches_.push_back(std::move(c));
    }
    m_ = 0.0;
    for (const auto& b : p.blocks()) m_ += b.dim;
    m_ += static_cast<double>(p.ineqs().size());
    m_ += 2.0 * static_cast<double>(p.socs().size());
    m_ += static_cast<double>(p.quads().size());
    if (use_objective_) m_ += static_cast<double>(p.log_terms().size());
  }

  double barrier_count() const { return m_; }

  // Refresh block caches; false if any strict-feasibility condition fails.
  bool refresh(const Eigen::VectorXd& v) {
    for (size_t b = 0; b < caches_.size(); ++b) {
      caches_[b].x = p_.block_value(static_cast<int>(b), v);
      Eigen::LLT<Eigen::MatrixXcd> llt(caches_[b].x);
      caches_[b].pd = llt.info() == Eigen::Success;
      if (!caches_[b].pd) return false;
      caches_[b].y = llt.solve(
          Eigen::MatrixXcd::Identity(caches_[b].x.rows(), caches_[b].x.cols()));
    }
    for (const auto& a : p_.ineqs())
      if (a.eval(v) <= 0) return false;
    for (const auto& s : p_.socs()) {
      const double r = s.rhs.eval(v);
      if (r <= 0) return false;
      double n2 = 0.0;
      for (const auto& u : s.u) {
        const double val = u.eval(v);
        n2 += val * val;
      }
      if (r * r - n2 <= 0) return false;
    }
    for (const auto& q : p_.quads())
      if (v.dot(q.p_mat * v) + q.p_vec.dot(v) + q.constant >= 0) return false;
    if (use_objective_)
      for (const auto& t : p_.log_terms())
        if (t.arg.eval(v) <= 0) return false;
    return true;
  }

  bool strictly_feasible(const Eigen::VectorXd& v) { return refresh(v); }

  // Barrier-augmented objective Psi_t = t * F + sum ln(margins) + logdet.
  // refresh(v) must have succeeded for the same v.
  double value(const Eigen::VectorXd& v, double t) const {
    double psi = 0.0;
    if (use_objective_) {
      double f = p_.linear_objective().coeff.size()
                     ? p_.linear_objective().eval(v)
                     : 0.0;
      for (const auto& lt : p_.log_terms())
        f += lt.weight * std::log2(lt.arg.eval(v));
      psi += t * f;
    }
    for (const auto& c : caches_) {
      Eigen::LLT<Eigen::MatrixXcd> llt(c.x);
      double ld = 0.0;
      for (int i = 0; i < c.x.rows(); ++i)
        ld += 2.0 * std::log(llt.matrixL()(i, i).real());
      psi += ld;
    }
    for (const auto& a : p_.ineqs()) psi += std::log(a.eval(v));
    for (const auto& s : p_.socs()) {
      const double r = s.rhs.eval(v);
      double n2 = 0.0;
      for (const auto& u : s.u) {
        const double val = u.eval(v);
        n2 += val * val;
      }
      psi += std::log(r * r - n2);
    }
    for (const auto& q : p_.quads())
      psi += std::log(-(v.dot(q.p_mat * v) + q.p_vec.dot(v) + q.constant));
    return psi;
  }

  void derivatives(const Eigen::VectorXd& v, double t, Eigen::VectorXd* grad,
                   Eigen::MatrixXd* hess) const {
    const int n = p_.num_params();
    grad->setZero(n);
    hess->setZero(n, n);
    if (use_objective_) {
      if (p_.linear_objective().coeff.size())
        *grad += t * p_.linear_objective().coeff;
      for (const auto& lt : p_.log_terms()) {
        const double arg = lt.arg.eval(v);
        const double w = t * lt.weight / kLn2;
        *grad += (w / arg) * lt.arg.coeff;
        hess->noalias() -= (w / (arg * arg)) * lt.arg.coeff * lt.arg.coeff.transpose();
      }
    }
    for (size_t b = 0; b < caches_.size(); ++b) {
      const auto& blk = p_.blocks()[b];
      const auto& c = caches_[b];
      const int off = blk.param_offset;
      // d logdet = tr(Y E_a); d2 = -tr(Y E_a Y E_b)
      for (int a = 0; a < blk.param_count; ++a) {
        double ga = 0.0;
        for (const auto& e : c.basis[a]) ga += (e.w * c.y(e.j, e.i)).real();
        (*grad)(off + a) += ga;
        for (int bb = a; bb < blk.param_count; ++bb) {
          std::complex<double> h{0.0, 0.0};
          for (const auto& ea : c.basis[a])
            for (const auto& eb : c.basis[bb])
              h += ea.w * eb.w * c.y(ea.j, eb.i) * c.y(eb.j, ea.i);
          (*hess)(off + a, off + bb) -= h.real();
          if (bb != a) (*hess)(off + bb, off + a) -= h.real();
        }
      }
    }
    for (const auto& a : p_.ineqs()) {
      const double g = a.eval(v);
      *grad += a.coeff / g;
      hess->noalias() -= (a.coeff * a.coeff.transpose()) / (g * g);
    }
    for (const auto& s : p_.socs()) {
      const double r = s.rhs.eval(v);
      Eigen::VectorXd dw = 2.0 * r * s.rhs.coeff;
      Eigen::MatrixXd d2w = 2.0 * s.rhs.coeff * s.rhs.coeff.transpose();
      double w = r * r;
      for (const auto& u : s.u) {
        const double val = u.eval(v);
        w -= val * val;
        dw -= 2.0 * val * u.coeff;
        d2w.noalias() -= 2.0 * u.coeff * u.coeff.transpose();
      }
      *grad += dw / w;
      hess->noalias() += d2w / w - (dw * dw.transpose()) / (w * w);
    }
    for (const auto& q : p_.quads()) {
      const double qv = v.dot(q.p_mat * v) + q.p_vec.dot(v) + q.constant;
      const Eigen::VectorXd dq = 2.0 * q.p_mat * v + q.p_vec;
      // phi = ln(-q): grad = -dq / (-q), hess = -d2q/(-q) - dq dq'/q^2
      *grad += dq / qv;  // == -dq / (-qv)
      hess->noalias() += 2.0 * q.p_mat / qv - (dq * dq.transpose()) / (qv * qv);
    }
  }

 private:
  const ConicProgram& p_;
  bool use_objective_;
  std::vector<BlockCache> caches_;
  double m_ = 0.0;
};

struct NewtonOutcome {
  bool converged = false;
  bool early_exit = false;
  int steps = 0;
};

// Damped Newton maximization of Psi_t from a strictly feasible v (updated in
// place). stop_early, when set, short-circuits the centering (phase I).
NewtonOutcome newton_center(BarrierProblem& bp, Eigen::VectorXd& v, double t,
                            int max_steps, int* budget,
                            const std::function<bool(const Eigen::VectorXd&)>&
                                stop_early = nullptr) {
  NewtonOutcome out;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  for (int it = 0; it < max_steps && *budget > 0; ++it, --(*budget)) {
    if (!bp.refresh(v)) break;  // should not happen; treated as failure
    if (stop_early && stop_early(v)) {
      out.early_exit = true;
      out.converged = true;
      return out;
    }
    bp.derivatives(v, t, &grad, &hess);
    Eigen::MatrixXd hn = -hess;
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    double ridge = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      ldlt.compute(hn + ridge * Eigen::MatrixXd::Identity(hn.rows(), hn.cols()));
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) break;
      ridge = ridge == 0.0 ? 1e-10 * (1.0 + hn.diagonal().cwiseAbs().maxCoeff())
                           : ridge * 100.0;
    }
    const Eigen::VectorXd step = ldlt.solve(grad);
    const double decrement2 = grad.dot(step);
    ++out.steps;
    const double psi0 = bp.value(v, t);
    // Thresholds scale with |psi|: once t*objective is ~1e10, absolute
    // decrements below a few ulps of psi are below line-search resolution.
    const double scale = std::max(1.0, std::abs(psi0));
    if (decrement2 < 1e-11 * scale) {
      out.converged = true;
      return out;
    }
    double alpha = 1.0;
    bool moved = false;
    while (alpha > 1e-13) {
      Eigen::VectorXd cand = v + alpha * step;
      if (bp.strictly_feasible(cand) &&
          bp.value(cand, t) >= psi0 + 0.25 * alpha * decrement2) {
        v = std::move(cand);
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) {
      // No productive step left at this centering accuracy.
      out.converged = decrement2 < 1e-6 * scale;
      bp.refresh(v);
      return out;
    }
  }
  bp.refresh(v);
  return out;
}

// Phase I: maximize a uniform slack s below every scalar/SOC/quadratic
// constraint and every objective-log argument. PSD blocks stay interior on
// their own (the start point keeps them PD).
ConicProgram make_phase1(const ConicProgram& p, int* s_index) {
  ConicProgram q;
  // Reproduce the variable layout, then append s.
  for (const auto& b : p.blocks()) {
    if (b.param_offset != q.num_params()) q.add_reals(b.param_offset - q.num_params());
    q.add_psd_block(b.dim, b.kind);
  }
  if (q.num_params() < p.num_params()) q.add_reals(p.num_params() - q.num_params());
  *s_index = q.add_reals(1);
  const int n = q.num_params();
  auto extend = [n](const Affine& a, double s_coeff) {
    Affine e;
    e.coeff = Eigen::VectorXd::Zero(n);
    e.coeff.head(a.coeff.size()) = a.coeff;
    e.coeff(n - 1) = s_coeff;
    e.constant = a.constant;
    return e;
  };
  for (const auto& a : p.ineqs()) q.add_ineq(extend(a, -1.0));
  for (const auto& t : p.log_terms()) q.add_ineq(extend(t.arg, -1.0));
  for (const auto& s : p.socs()) {
    ConicProgram::Soc soc;
    for (const auto& u : s.u) soc.u.push_back(extend(u, 0.0));
    soc.rhs = extend(s.rhs, -1.0);
    q.add_soc(std::move(soc));
  }
  for (const auto& qq : p.quads()) {
    ConicProgram::Quad nq;
    nq.p_mat = Eigen::MatrixXd::Zero(n, n);
    nq.p_mat.topLeftCorner(qq.p_mat.rows(), qq.p_mat.cols()) = qq.p_mat;
    nq.p_vec = Eigen::VectorXd::Zero(n);
    nq.p_vec.head(qq.p_vec.size()) = qq.p_vec;
    nq.p_vec(n - 1) = 1.0;
    nq.constant = qq.constant;
    q.add_quad(std::move(nq));
  }
  Affine obj;
  obj.coeff = Eigen::VectorXd::Zero(n);
  obj.coeff(n - 1) = 1.0;
  q.set_linear_objective(obj);
  return q;
}

// Margin of the slack-shifted constraints at (v, s = 0): the largest s that
// would still be strictly feasible.
double min_shiftable_margin(const ConicProgram& p, const Eigen::VectorXd& v) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& a : p.ineqs()) m = std::min(m, a.eval(v));
  for (const auto& t : p.log_terms()) m = std::min(m, t.arg.eval(v));
  for (const auto& s : p.socs()) {
    double n2 = 0.0;
    for (const auto& u : s.u) {
      const double val = u.eval(v);
      n2 += val * val;
    }
    m = std::min(m, s.rhs.eval(v) - std::sqrt(n2));
  }
  for (const auto& q : p.quads())
    m = std::min(m, -(v.dot(q.p_mat * v) + q.p_vec.dot(v) + q.constant));
  return m;
}

Eigen::VectorXd default_start(const ConicProgram& p) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p.num_params());
  for (size_t b = 0; b < p.blocks().size(); ++b)
    p.set_block_value(static_cast<int>(b),
                      Eigen::MatrixXcd::Identity(p.blocks()[b].dim, p.blocks()[b].dim),
                      v);
  return v;
}

// Ensure every PSD block slice of v is strictly PD (identity-loading ridge).
void make_blocks_pd(const ConicProgram& p, Eigen::VectorXd& v) {
  for (size_t b = 0; b < p.blocks().size(); ++b) {
    Eigen::MatrixXcd x = p.block_value(static_cast<int>(b), v);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(x, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double scale = std::max(1e-8, x.trace().real() / x.rows());
    if (lmin < 1e-8 * scale) {
      x += (1e-6 * scale - std::min(0.0, lmin)) *
           Eigen::MatrixXcd::Identity(x.rows(), x.cols());
      p.set_block_value(static_cast<int>(b), x, v);
    }
  }
}

}  // namespace

SolveResult solve(const ConicProgram& p, const SolveOptions& opts) {
  SolveResult res;
  const int n = p.num_params();
  Eigen::VectorXd v =
      opts.initial && opts.initial->size() == n ? *opts.initial : default_start(p);
  make_blocks_pd(p, v);
  int budget = opts.max_newton;

  // Phase I unless the start point is already comfortably interior.
  BarrierProblem bp_check(p, /*use_objective=*/true);
  const double margin0 = std::min(
      min_shiftable_margin(p, v),
      bp_check.strictly_feasible(v) ? std::numeric_limits<double>::infinity()
                                    : -1.0);
  if (!(margin0 >= opts.phase1_stop)) {
    int s_index = -1;
    ConicProgram ph1 = make_phase1(p, &s_index);
    Eigen::VectorXd v1 = Eigen::VectorXd::Zero(ph1.num_params());
    v1.head(n) = v;
    const double m0 = min_shiftable_margin(p, v);
    v1(s_index) = m0 - std::max(1e-6, 0.1 * std::abs(m0));
    BarrierProblem bp1(ph1, /*use_objective=*/true);  // linear objective only
    if (!bp1.strictly_feasible(v1)) {
      res.status = SolveStatus::failed;
      return res;
    }
    const double m1 = bp1.barrier_count();
    double t = 1.0;
    bool interior = false;
    auto stop = [&](const Eigen::VectorXd& w) {
      return w(s_index) >= opts.phase1_stop;
    };
    for (int outer = 0; outer < 60 && budget > 0; ++outer) {
      const NewtonOutcome nc = newton_center(bp1, v1, t, 60, &budget, stop);
      res.newton_steps += nc.steps;
      if (nc.early_exit) {
        interior = true;
        break;
      }
      if (m1 / t < std::max(opts.tol, 1e-10)) break;
      t *= opts.mu;
    }
    if (!interior) {
      // Phase I converged without reaching the requested margin.
      if (v1(s_index) <= 0.0) {
        res.status = SolveStatus::infeasible;
        res.v = v1.head(n);
        res.worst_violation = -v1(s_index);
        return res;
      }
      // Thin but positive interior: proceed with what we have.
    }
    v = v1.head(n);
  }

  BarrierProblem bp(p, /*use_objective=*/true);
  if (!bp.strictly_feasible(v)) {
    res.status = SolveStatus::failed;
    return res;
  }
  const double m = std::max(1.0, bp.barrier_count());
  double t = 1.0;
  bool converged = false;
  for (int outer = 0; outer < 80 && budget > 0; ++outer) {
    const NewtonOutcome nc = newton_center(bp, v, t, 80, &budget);
    res.newton_steps += nc.steps;
    if (m / t < opts.tol) {
      converged = nc.converged;
      break;
    }
    t *= opts.mu;
  }
  res.v = v;
  res.value = p.objective_value(v);
  res.gap_bound = m / t;
  res.worst_violation = 0.0;  // interior by construction
  if (m / t < opts.tol)
    res.status = converged ? SolveStatus::optimal : SolveStatus::inaccurate;
  else
    res.status = m / t < 100.0 * opts.tol ? SolveStatus::inaccurate
                                          : SolveStatus::failed;
  return res;
}

}  // namespace haps::conic
