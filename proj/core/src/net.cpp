#include "orgmarl/net.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace orgmarl {

DenseNet DenseNet::init(int in, int hidden, int out, Rng& rng) {
  DenseNet net = zeros(in, hidden, out);
  auto fill = [&rng](std::vector<double>& w, int fan_in) {
    std::uniform_real_distribution<double> unif(-1.0 / std::sqrt(fan_in),
                                                1.0 / std::sqrt(fan_in));
    for (double& x : w) x = unif(rng);
  };
  fill(net.w1, in);
  fill(net.b1, in);
  fill(net.w2, hidden);
  fill(net.b2, hidden);
  return net;
}

DenseNet DenseNet::zeros(int in, int hidden, int out) {
  if (in <= 0 || hidden <= 0 || out <= 0)
    throw std::invalid_argument("net dimensions must be positive");
  DenseNet net;
  net.in = in;
  net.hidden = hidden;
  net.out = out;
  net.w1.assign(static_cast<std::size_t>(hidden) * in, 0.0);
  net.b1.assign(static_cast<std::size_t>(hidden), 0.0);
  net.w2.assign(static_cast<std::size_t>(out) * hidden, 0.0);
  net.b2.assign(static_cast<std::size_t>(out), 0.0);
  return net;
}

std::size_t DenseNet::param_count() const {
  return w1.size() + b1.size() + w2.size() + b2.size();
}

bool DenseNet::finite() const {
  auto ok = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return ok(w1) && ok(b1) && ok(w2) && ok(b2);
}

Gradients Gradients::zeros_like(const DenseNet& net) {
  Gradients g;
  g.w1.assign(net.w1.size(), 0.0);
  g.b1.assign(net.b1.size(), 0.0);
  g.w2.assign(net.w2.size(), 0.0);
  g.b2.assign(net.b2.size(), 0.0);
  return g;
}

void Gradients::accumulate(const Gradients& other) {
  auto add = [](std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  };
  add(w1, other.w1);
  add(b1, other.b1);
  add(w2, other.w2);
  add(b2, other.b2);
}

void Gradients::scale(double s) {
  for (auto* v : {&w1, &b1, &w2, &b2})
    for (double& x : *v) x *= s;
}

ForwardCache forward(const DenseNet& net, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != net.in)
    throw std::invalid_argument("input size mismatch");
  ForwardCache cache;
  cache.x = x;
  cache.h.resize(static_cast<std::size_t>(net.hidden));
  for (int j = 0; j < net.hidden; ++j) {
    double acc = net.b1[static_cast<std::size_t>(j)];
    const double* row = &net.w1[static_cast<std::size_t>(j) * net.in];
    for (int k = 0; k < net.in; ++k) acc += row[k] * x[static_cast<std::size_t>(k)];
    cache.h[static_cast<std::size_t>(j)] = std::tanh(acc);
  }
  cache.z.resize(static_cast<std::size_t>(net.out));
  for (int o = 0; o < net.out; ++o) {
    double acc = net.b2[static_cast<std::size_t>(o)];
    const double* row = &net.w2[static_cast<std::size_t>(o) * net.hidden];
    for (int j = 0; j < net.hidden; ++j) acc += row[j] * cache.h[static_cast<std::size_t>(j)];
    cache.z[static_cast<std::size_t>(o)] = acc;
  }
  return cache;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  const double zmax = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - zmax);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

Gradients backward(const DenseNet& net, const ForwardCache& cache,
                   const std::vector<double>& upstream) {
  if (static_cast<int>(upstream.size()) != net.out)
    throw std::invalid_argument("upstream gradient size mismatch");
  Gradients g = Gradients::zeros_like(net);
  // Output layer.
  std::vector<double> dh(static_cast<std::size_t>(net.hidden), 0.0);
  for (int o = 0; o < net.out; ++o) {
    const double dz = upstream[static_cast<std::size_t>(o)];
    g.b2[static_cast<std::size_t>(o)] = dz;
    double* grow = &g.w2[static_cast<std::size_t>(o) * net.hidden];
    const double* wrow = &net.w2[static_cast<std::size_t>(o) * net.hidden];
    for (int j = 0; j < net.hidden; ++j) {
      grow[j] = dz * cache.h[static_cast<std::size_t>(j)];
      dh[static_cast<std::size_t>(j)] += dz * wrow[j];
    }
  }
  // Hidden layer through tanh.
  for (int j = 0; j < net.hidden; ++j) {
    const double hj = cache.h[static_cast<std::size_t>(j)];
    const double da = dh[static_cast<std::size_t>(j)] * (1.0 - hj * hj);
    g.b1[static_cast<std::size_t>(j)] = da;
    double* grow = &g.w1[static_cast<std::size_t>(j) * net.in];
    for (int k = 0; k < net.in; ++k) grow[k] = da * cache.x[static_cast<std::size_t>(k)];
  }
  return g;
}

AdamState AdamState::make(const DenseNet& net, double lr) {
  AdamState s;
  s.lr = lr;
  s.m.assign(net.param_count(), 0.0);
  s.v.assign(net.param_count(), 0.0);
  return s;
}

namespace {

template <typename Fn>
void for_each_param(DenseNet& net, const Gradients& g, Fn&& fn) {
  std::size_t idx = 0;
  auto walk = [&](std::vector<double>& p, const std::vector<double>& gp) {
    for (std::size_t i = 0; i < p.size(); ++i, ++idx) fn(p[i], gp[i], idx);
  };
  walk(net.w1, g.w1);
  walk(net.b1, g.b1);
  walk(net.w2, g.w2);
  walk(net.b2, g.b2);
}

}  // namespace

void adam_step(DenseNet& net, const Gradients& grads, AdamState& state) {
  for (const auto* v : {&grads.w1, &grads.b1, &grads.w2, &grads.b2})
    for (double x : *v)
      if (!std::isfinite(x)) throw std::runtime_error("non-finite gradient in adam_step");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step);
  for_each_param(net, grads, [&](double& p, double g, std::size_t idx) {
    double& m = state.m[idx];
    double& v = state.v[idx];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    p -= state.lr * (m / bc1) / (std::sqrt(v / bc2) + state.eps);
  });
}

GradCheckReport grad_check(const DenseNet& net,
                           const std::function<double(const DenseNet&)>& loss,
                           const Gradients& analytic, double tolerance) {
  constexpr double kStep = 1e-5;
  GradCheckReport report;
  DenseNet probe = net;
  const char* names[4] = {"w1", "b1", "w2", "b2"};
  std::vector<double>* params[4] = {&probe.w1, &probe.b1, &probe.w2, &probe.b2};
  const std::vector<double>* grads[4] = {&analytic.w1, &analytic.b1, &analytic.w2,
                                         &analytic.b2};
  for (int blk = 0; blk < 4; ++blk) {
    std::vector<double>& p = *params[blk];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + kStep;
      const double up = loss(probe);
      p[i] = saved - kStep;
      const double down = loss(probe);
      p[i] = saved;
      const double fd = (up - down) / (2.0 * kStep);
      const double an = (*grads[blk])[i];
      const double denom = std::max(std::abs(fd) + std::abs(an), 1e-6);
      const double rel = std::abs(fd - an) / denom;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = std::string(names[blk]) + "[" + std::to_string(i) + "]";
      }
    }
  }
  report.pass = report.max_rel_error <= tolerance;
  return report;
}

void save_net(const DenseNet& net, std::ostream& os) {
  os.precision(std::numeric_limits<double>::max_digits10);
  os << net.in << ' ' << net.hidden << ' ' << net.out << '\n';
  for (const auto* v : {&net.w1, &net.b1, &net.w2, &net.b2}) {
    for (std::size_t i = 0; i < v->size(); ++i)
      os << (*v)[i] << (i + 1 == v->size() ? '\n' : ' ');
  }
}

DenseNet load_net(std::istream& is) {
  int in, hidden, out;
  if (!(is >> in >> hidden >> out)) throw std::runtime_error("bad net header");
  DenseNet net = DenseNet::zeros(in, hidden, out);
  for (auto* v : {&net.w1, &net.b1, &net.w2, &net.b2})
    for (double& x : *v)
      if (!(is >> x)) throw std::runtime_error("truncated net snapshot");
  return net;
}

}  // namespace orgmarl
