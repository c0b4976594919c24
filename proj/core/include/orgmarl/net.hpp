#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "orgmarl/domain.hpp"

namespace orgmarl {

// One-hidden-layer tanh network with a linear output head.
// W1 is [hidden x in] row-major, W2 is [out x hidden] row-major.
struct DenseNet {
  int in = 0, hidden = 0, out = 0;
  std::vector<double> w1, b1, w2, b2;

  // Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
  static DenseNet init(int in, int hidden, int out, Rng& rng);
  static DenseNet zeros(int in, int hidden, int out);

  std::size_t param_count() const;
  bool finite() const;
};

struct ForwardCache {
  std::vector<double> x;   // input
  std::vector<double> h;   // tanh hidden activations
  std::vector<double> z;   // linear outputs
};

struct Gradients {
  std::vector<double> w1, b1, w2, b2;
  static Gradients zeros_like(const DenseNet& net);
  void accumulate(const Gradients& other);
  void scale(double s);
};

// z = W2 tanh(W1 x + b1) + b2
ForwardCache forward(const DenseNet& net, const std::vector<double>& x);

std::vector<double> softmax(const std::vector<double>& logits);

// Gradients of a scalar loss with upstream dL/dz.
Gradients backward(const DenseNet& net, const ForwardCache& cache,
                   const std::vector<double>& upstream);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<double> m, v;  // flat, mirrors parameter layout

  static AdamState make(const DenseNet& net, double lr);
};

// In-place adaptive-moment update. Throws on non-finite gradients.
void adam_step(DenseNet& net, const Gradients& grads, AdamState& state);

struct GradCheckReport {
  double max_rel_error = 0.0;
  bool pass = false;
  std::string worst_param;
};

// Central finite differences (step 1e-5) against analytic gradients.
// `loss` evaluates the scalar loss for a parameter setting; `analytic` are the
// gradients under test.
GradCheckReport grad_check(const DenseNet& net,
                           const std::function<double(const DenseNet&)>& loss,
                           const Gradients& analytic, double tolerance);

// Flat text snapshot: shape header then W1 row-major, b1, W2 row-major, b2.
void save_net(const DenseNet& net, std::ostream& os);
DenseNet load_net(std::istream& is);

}  // namespace orgmarl
