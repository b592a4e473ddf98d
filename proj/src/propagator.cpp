#include "kbe/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kbe {

std::string_view to_string(PropagatorMode m) { return m == PropagatorMode::exponential ? "exponential" : "cayley"; }

PropagatorMode parse_propagator(std::string_view s) {
  if (s == "cayley") return PropagatorMode::cayley;
  if (s == "exponential") return PropagatorMode::exponential;
  throw ConfigError("propagator must be 'cayley' or 'exponential'", "propagator");
}

Mat2 step_operator(const Mat2& h, double dt, PropagatorMode mode) {
  if (mode == PropagatorMode::cayley) {
    const Mat2 a = h * cplx{0.0, 0.5 * dt};
    return inverse(Mat2::identity() + a) * (Mat2::identity() - a);
  }
  // h = a 1 + B with B traceless Hermitian, B^2 = |b|^2 1.
  const cplx a = 0.5 * trace(h);
  const Mat2 b = h - Mat2::identity() * a;
  const double norm = std::sqrt(std::norm(b(0, 0)) + std::norm(b(0, 1)));
  const double x = norm * dt;
  const double sinc = x < 1e-8 ? dt * (1.0 - x * x / 6.0) : std::sin(x) / norm;
  const Mat2 rot = Mat2::identity() * cplx{std::cos(x)} - b * cplx{0.0, sinc};
  return rot * std::exp(-kI * a * dt);
}

void StepConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be a positive finite number", "dt");
  if (n_steps < 0) throw ConfigError("n_t must be non-negative", "n_t");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive", "tolerance");
  if (max_iter < 1) throw ConfigError("max_iter must be at least 1", "max_iter");
}

namespace {

std::size_t sz(int x) { return static_cast<std::size_t>(x); }

}  // namespace

Propagator::Propagator(const KGrid& grid, const ModelConfig& model, const StepConfig& step,
                       const engine::Schedule& schedule, std::size_t memory_budget)
    : grid_(grid),
      model_(model),
      cfg_(step),
      schedule_(schedule),
      bands_(band_energies(model, grid)),
      executor_(schedule),
      kernels_(grid, executor_),
      capacity_(std::max(step.n_steps, 1)) {
  cfg_.validate();
  schedule_.validate(grid.size());
  model_.validate(grid.size(), cfg_.n_steps);

  // Green's function plus self-energy history.
  const std::size_t need = 2 * TwoTimeFunction::bytes_for(grid.size(), capacity_);
  if (need > memory_budget)
    throw CapacityError("two-time storage needs " + std::to_string(need) + " bytes, budget is " +
                        std::to_string(memory_budget));
  rule_ = QuadratureTable(capacity_, cfg_.dt, cfg_.quadrature);

  for (const auto& r : engine::shard_ranges(grid.size(), schedule_.n_shards)) {
    g_.push_back(init_state(grid, capacity_, cfg_.dt, memory_budget, r.k_count, r.k_offset()));
    sigma_.emplace_back(r.k_count, r.k_offset(), capacity_, cfg_.dt);
  }
  const std::size_t n_sh = g_.size();
  prev_.resize(n_sh);
  cur_.resize(n_sh);
  cross_less_.resize(n_sh);
  cross_great_.resize(n_sh);
  saved_.resize(n_sh);
  density0_ = observables(0).density;
}

std::vector<Mat2> Propagator::density_matrix(int i) const {
  std::vector<Mat2> rho(sz(grid_.size()));
  for (const auto& g : g_)
    for (int k = 0; k < g.n_k_local(); ++k) rho[sz(g.k_offset() + k)] = g.at(Component::lesser, k, i, i) * (-kI);
  return rho;
}

std::vector<Mat2> Propagator::step_operators(const SingleParticleH& h_from, const SingleParticleH& h_to) const {
  std::vector<Mat2> phi(h_from.h.size());
  for (std::size_t k = 0; k < phi.size(); ++k)
    phi[k] = step_operator((h_from.h[k] + h_to.h[k]) * cplx{0.5}, cfg_.dt, cfg_.propagator);
  return phi;
}

void Propagator::gather_frontier(int n) {
  engine::ScopedTimer timer(executor_.timings(), engine::KernelClass::combine);
  std::vector<const TwoTimeFunction*> ptrs;
  for (const auto& g : g_) ptrs.push_back(&g);
  gather_into(frontier_slice_, ptrs, n);
}

bool Propagator::frontier_finite(int n) const {
  for (const auto& g : g_)
    for (int k = 0; k < g.n_k_local(); ++k)
      for (int s = 0; s <= n; ++s)
        for (Component c : {Component::lesser, Component::greater})
          if (!is_finite(g.at(c, k, n, s)) || !is_finite(g.at(c, k, s, n))) return false;
  return true;
}

void Propagator::prepare() {
  const int f = frontier_;
  if (f >= capacity_) throw CapacityError("time grid exhausted at step " + std::to_string(f));
  gather_frontier(f);
  for (std::size_t s = 0; s < g_.size(); ++s) {
    evaluate_sigma_batched(sigma_[s], frontier_slice_, model_, kernels_);
    collision_frontier(g_[s], sigma_[s], f, rule_, cfg_.limit, executor_, prev_[s]);
  }
}

// Writes the new row of G< (t-equation) and column of G> (t'-equation) at
// frontier n = f + 1, mirrors them, then advances both diagonals along t from
// the (f, n) entries. The predictor takes the source term at f alone; the
// corrector averages the sources at f and n.
void Propagator::update_frontier(int n, const std::vector<Mat2>& phi, bool corrector) {
  const int f = n - 1;
  const cplx mdt = -kI * cfg_.dt;
  const cplx mdt2 = -kI * (0.5 * cfg_.dt);
  engine::ScopedTimer timer(executor_.timings(), engine::KernelClass::propagate);
  for (std::size_t sh = 0; sh < g_.size(); ++sh) {
    auto& g = g_[sh];
    const auto& ip = prev_[sh];
    const auto& ic = cur_[sh];
    for (int k = 0; k < g.n_k_local(); ++k) {
      const Mat2& p = phi[sz(g.k_offset() + k)];
      const Mat2 pd = adjoint(p);
      for (int l = 0; l < n; ++l) {
        const Mat2& g_less = g.at(Component::lesser, k, f, l);
        const Mat2& g_great = g.at(Component::greater, k, l, f);
        Mat2& lt = g.at(Component::lesser, k, n, l);
        Mat2& gt = g.at(Component::greater, k, l, n);
        if (!corrector) {
          lt = p * (g_less + ip.lesser(k, l) * mdt);
          gt = (g_great - ip.greater(k, l) * mdt) * pd;
        } else {
          lt = p * g_less + (p * ip.lesser(k, l) + ic.lesser(k, l)) * mdt2;
          gt = g_great * pd - (ip.greater(k, l) * pd + ic.greater(k, l)) * mdt2;
        }
      }
    }
    mirror_frontier(g, n);
    for (int k = 0; k < g.n_k_local(); ++k) {
      const Mat2& p = phi[sz(g.k_offset() + k)];
      for (Component c : {Component::lesser, Component::greater}) {
        const bool less = c == Component::lesser;
        const Mat2& from = g.at(c, k, f, n);
        Mat2 next;
        if (!corrector) {
          const Mat2 src = less ? ip.lesser(k, f) : -adjoint(ip.greater(k, f));
          next = p * (from + src * mdt);
        } else {
          const Mat2& src_prev = less ? cross_less_[sh][sz(k)] : cross_great_[sh][sz(k)];
          const Mat2 src_cur = less ? ic.lesser(k, n) : -adjoint(ic.greater(k, n));
          next = p * from + (p * src_prev + src_cur) * mdt2;
        }
        g.at(c, k, n, n) = anti_hermitian_part(next);
      }
    }
  }
}

void Propagator::predict() {
  const int f = frontier_;
  const int n = f + 1;
  const auto rho = density_matrix(f);
  const auto h_f = build_h(grid_, model_, bands_, f, cfg_.dt, rho);
  const auto h_n = build_h(grid_, model_, bands_, n, cfg_.dt, rho);
  update_frontier(n, step_operators(h_f, h_n), false);
}

void Propagator::snapshot_frontier(int n) {
  for (std::size_t sh = 0; sh < g_.size(); ++sh) {
    const auto& g = g_[sh];
    auto& buf = saved_[sh];
    buf.clear();
    for (int k = 0; k < g.n_k_local(); ++k)
      for (int s = 0; s <= n; ++s) {
        buf.push_back(g.at(Component::lesser, k, n, s));
        buf.push_back(g.at(Component::greater, k, s, n));
      }
  }
}

double Propagator::frontier_change(int n) const {
  double r = 0.0;
  for (std::size_t sh = 0; sh < g_.size(); ++sh) {
    const auto& g = g_[sh];
    std::size_t idx = 0;
    for (int k = 0; k < g.n_k_local(); ++k)
      for (int s = 0; s <= n; ++s) {
        r = std::max(r, max_abs(g.at(Component::lesser, k, n, s) - saved_[sh][idx++]));
        r = std::max(r, max_abs(g.at(Component::greater, k, s, n) - saved_[sh][idx++]));
      }
  }
  return r;
}

StepReport Propagator::correct() {
  const int f = frontier_;
  const int n = f + 1;
  StepReport rep;
  rep.step = n;
  rep.converged = false;
  const auto h_f = build_h(grid_, model_, bands_, f, cfg_.dt, density_matrix(f));
  for (int it = 1; it <= cfg_.max_iter; ++it) {
    snapshot_frontier(n);
    const auto h_n = build_h(grid_, model_, bands_, n, cfg_.dt, density_matrix(n));
    const auto phi = step_operators(h_f, h_n);

    gather_frontier(n);
    for (std::size_t sh = 0; sh < g_.size(); ++sh) {
      auto& g = g_[sh];
      evaluate_sigma_batched(sigma_[sh], frontier_slice_, model_, kernels_);
      collision_frontier(g, sigma_[sh], n, rule_, cfg_.limit, executor_, cur_[sh]);
      auto& cl = cross_less_[sh];
      auto& cg = cross_great_[sh];
      cl.resize(sz(g.n_k_local()));
      cg.resize(sz(g.n_k_local()));
      engine::ScopedTimer timer(executor_.timings(), engine::KernelClass::collision);
      for (int k = 0; k < g.n_k_local(); ++k) {
        cl[sz(k)] = collision_lesser(g, sigma_[sh], k, f, n, rule_, cfg_.limit);
        cg[sz(k)] = collision_greater(g, sigma_[sh], k, f, n, rule_, cfg_.limit);
      }
    }
    update_frontier(n, phi, true);

    rep.iterations = it;
    rep.residual = frontier_change(n);
    rep.residual_history.push_back(rep.residual);
    if (rep.residual <= cfg_.tolerance) {
      rep.converged = true;
      break;
    }
  }
  return rep;
}

StepReport Propagator::step() {
  if (!frontier_finite(frontier_))
    throw PoisonedStateError("non-finite Green's function at time index " + std::to_string(frontier_));
  const engine::KernelTimings before = executor_.timings();
  prepare();
  predict();
  StepReport rep = correct();
  frontier_ += 1;
  for (auto& g : g_) g.set_frontier(frontier_);
  for (auto& s : sigma_) s.set_frontier(frontier_);
  if (!frontier_finite(frontier_))
    throw PoisonedStateError("step " + std::to_string(frontier_) + " produced a non-finite Green's function");

  for (auto& g : g_) rep.anticommutation_drift = std::max(rep.anticommutation_drift, anticommutation_drift(g, frontier_));
  const auto obs = observables(frontier_);
  rep.density = obs.density;
  rep.density_drift = std::abs(obs.density - density0_);
  for (std::size_t i = 0; i < rep.timings.seconds.size(); ++i)
    rep.timings.seconds[i] = executor_.timings().seconds[i] - before.seconds[i];
  return rep;
}

Observables Propagator::observables(int i) const {
  Observables out;
  out.t = i * cfg_.dt;
  for (const auto& g : g_) {
    const auto o = observables_at(g, i);
    out.n_v.insert(out.n_v.end(), o.n_v.begin(), o.n_v.end());
    out.n_c.insert(out.n_c.end(), o.n_c.begin(), o.n_c.end());
  }
  double sv = 0.0, sc = 0.0;
  for (std::size_t k = 0; k < out.n_v.size(); ++k) {
    sv += out.n_v[k];
    sc += out.n_c[k];
  }
  const double nk = static_cast<double>(out.n_v.size());
  out.mean_n_v = sv / nk;
  out.mean_n_c = sc / nk;
  out.density = (sv + sc) / nk;
  return out;
}

TwoTimeGF Propagator::gathered() const {
  std::vector<const TwoTimeFunction*> ptrs;
  for (const auto& g : g_) ptrs.push_back(&g);
  TwoTimeGF out = gather_full(ptrs);
  out.set_frontier(frontier_);
  return out;
}

RunResult run(const RunOptions& options, const StepSink& sink) {
  const KGrid grid(options.n_k);
  Propagator prop(grid, options.model, options.step, options.schedule, options.memory_budget);
  RunResult result;
  result.observables.push_back(prop.observables(0));
  if (sink) sink(result.observables.back(), nullptr);
  for (int n = 0; n < options.step.n_steps; ++n) {
    result.reports.push_back(prop.step());
    result.observables.push_back(prop.observables(prop.frontier()));
    if (sink) sink(result.observables.back(), &result.reports.back());
  }
  result.trajectory = prop.gathered();
  return result;
}

}  // namespace kbe
