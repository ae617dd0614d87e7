#include "uavnet/network.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace uavnet {

void Layer::init(int in_size, int out_size, Rng& rng) {
  in = in_size;
  out = out_size;
  w.resize(static_cast<std::size_t>(in) * out);
  b.resize(out);
  const double k = 1.0 / std::sqrt(static_cast<double>(in_size));
  for (auto& x : w) x = rng.uniform(-k, k);
  for (auto& x : b) x = rng.uniform(-k, k);
}

void Layer::zero(int in_size, int out_size) {
  in = in_size;
  out = out_size;
  w.assign(static_cast<std::size_t>(in) * out, 0.0);
  b.assign(out, 0.0);
}

void linear_forward(const Layer& l, const double* x, int batch, double* y) {
  for (int s = 0; s < batch; ++s) {
    const double* xr = x + static_cast<std::size_t>(s) * l.in;
    double* yr = y + static_cast<std::size_t>(s) * l.out;
    for (int o = 0; o < l.out; ++o) {
      const double* wr = l.w.data() + static_cast<std::size_t>(o) * l.in;
      double acc = l.b[o];
      for (int i = 0; i < l.in; ++i) acc += xr[i] * wr[i];
      yr[o] = acc;
    }
  }
}

void linear_backward(const Layer& l, const double* x, const double* dy, int batch,
                     double* dx, Layer& grad) {
  for (int s = 0; s < batch; ++s) {
    const double* xr = x + static_cast<std::size_t>(s) * l.in;
    const double* dyr = dy + static_cast<std::size_t>(s) * l.out;
    for (int o = 0; o < l.out; ++o) {
      const double g = dyr[o];
      if (g == 0.0) continue;
      grad.b[o] += g;
      double* gw = grad.w.data() + static_cast<std::size_t>(o) * l.in;
      for (int i = 0; i < l.in; ++i) gw[i] += g * xr[i];
    }
  }
  if (dx != nullptr) {
    for (int s = 0; s < batch; ++s) {
      double* dxr = dx + static_cast<std::size_t>(s) * l.in;
      const double* dyr = dy + static_cast<std::size_t>(s) * l.out;
      std::memset(dxr, 0, sizeof(double) * l.in);
      for (int o = 0; o < l.out; ++o) {
        const double g = dyr[o];
        if (g == 0.0) continue;
        const double* wr = l.w.data() + static_cast<std::size_t>(o) * l.in;
        for (int i = 0; i < l.in; ++i) dxr[i] += g * wr[i];
      }
    }
  }
}

void relu_inplace(double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] < 0.0) y[i] = 0.0;
  }
}

void relu_backward_inplace(const double* h, double* dy, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (h[i] <= 0.0) dy[i] = 0.0;
  }
}

int argmax_index(const double* v, int n) {
  int best = 0;
  for (int i = 1; i < n; ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

// --- BranchingNet -----------------------------------------------------------

BranchingNet::BranchingNet(const NetOptions& o, Rng& rng) : opt(o) {
  if (o.input_size < 1) throw std::invalid_argument("BranchingNet: input_size must be >= 1");
  trunk1.init(o.input_size, o.trunk1_units, rng);
  trunk2.init(o.trunk1_units, o.trunk2_units, rng);
  value_hidden.init(o.trunk2_units, o.head_hidden_units, rng);
  value_out.init(o.head_hidden_units, 1, rng);
  adv1_hidden.init(o.trunk2_units, o.head_hidden_units, rng);
  adv1_out.init(o.head_hidden_units, o.transport_actions, rng);
  adv2_hidden.init(o.trunk2_units, o.head_hidden_units, rng);
  adv2_out.init(o.head_hidden_units, o.assoc_actions, rng);
}

void BranchingNet::forward(const double* x, int batch, Cache& c) const {
  const int n1 = opt.trunk1_units, n2 = opt.trunk2_units, nh = opt.head_hidden_units;
  const int k1 = opt.transport_actions, k2 = opt.assoc_actions;
  c.batch = batch;
  c.x.assign(x, x + static_cast<std::size_t>(batch) * opt.input_size);
  c.h1.resize(static_cast<std::size_t>(batch) * n1);
  c.h2.resize(static_cast<std::size_t>(batch) * n2);
  c.hv.resize(static_cast<std::size_t>(batch) * nh);
  c.v.resize(batch);
  c.ha1.resize(static_cast<std::size_t>(batch) * nh);
  c.a1.resize(static_cast<std::size_t>(batch) * k1);
  c.ha2.resize(static_cast<std::size_t>(batch) * nh);
  c.a2.resize(static_cast<std::size_t>(batch) * k2);
  c.q1.resize(static_cast<std::size_t>(batch) * k1);
  c.q2.resize(static_cast<std::size_t>(batch) * k2);
  c.amax1.resize(batch);
  c.amax2.resize(batch);

  linear_forward(trunk1, c.x.data(), batch, c.h1.data());
  relu_inplace(c.h1.data(), c.h1.size());
  linear_forward(trunk2, c.h1.data(), batch, c.h2.data());
  if (opt.relu_second_trunk_layer) relu_inplace(c.h2.data(), c.h2.size());

  linear_forward(value_hidden, c.h2.data(), batch, c.hv.data());
  relu_inplace(c.hv.data(), c.hv.size());
  linear_forward(value_out, c.hv.data(), batch, c.v.data());

  linear_forward(adv1_hidden, c.h2.data(), batch, c.ha1.data());
  relu_inplace(c.ha1.data(), c.ha1.size());
  linear_forward(adv1_out, c.ha1.data(), batch, c.a1.data());

  linear_forward(adv2_hidden, c.h2.data(), batch, c.ha2.data());
  relu_inplace(c.ha2.data(), c.ha2.size());
  linear_forward(adv2_out, c.ha2.data(), batch, c.a2.data());

  for (int s = 0; s < batch; ++s) {
    const double* a1r = c.a1.data() + static_cast<std::size_t>(s) * k1;
    const double* a2r = c.a2.data() + static_cast<std::size_t>(s) * k2;
    const int m1 = argmax_index(a1r, k1);
    const int m2 = argmax_index(a2r, k2);
    c.amax1[s] = m1;
    c.amax2[s] = m2;
    double* q1r = c.q1.data() + static_cast<std::size_t>(s) * k1;
    double* q2r = c.q2.data() + static_cast<std::size_t>(s) * k2;
    for (int a = 0; a < k1; ++a) q1r[a] = c.v[s] + (a1r[a] - a1r[m1]);
    for (int a = 0; a < k2; ++a) q2r[a] = c.v[s] + (a2r[a] - a2r[m2]);
  }
}

BranchingNet::Output BranchingNet::forward_one(const std::vector<double>& obs) const {
  if (static_cast<int>(obs.size()) != opt.input_size) {
    throw std::invalid_argument("BranchingNet::forward_one: observation size mismatch");
  }
  Cache c;
  forward(obs.data(), 1, c);
  Output out;
  out.value = c.v[0];
  out.q1 = c.q1;
  out.q2 = c.q2;
  return out;
}

void BranchingNet::backward(const Cache& c, const std::vector<int>& a1_idx,
                            const std::vector<double>& dq1,
                            const std::vector<int>& a2_idx,
                            const std::vector<double>& dq2, BranchingNet& grad) const {
  const int batch = c.batch;
  const int n1 = opt.trunk1_units, n2 = opt.trunk2_units, nh = opt.head_hidden_units;
  const int k1 = opt.transport_actions, k2 = opt.assoc_actions;

  // dQ_d -> (dV, dA_d): Q_d(a) = V + A_d(a) - A_d(argmax); the subtracted
  // argmax entry takes -g (cancels exactly when a == argmax).
  std::vector<double> dv(batch, 0.0);
  std::vector<double> da1(static_cast<std::size_t>(batch) * k1, 0.0);
  std::vector<double> da2(static_cast<std::size_t>(batch) * k2, 0.0);
  for (int s = 0; s < batch; ++s) {
    const double g1 = dq1[s];
    dv[s] += g1;
    da1[static_cast<std::size_t>(s) * k1 + a1_idx[s]] += g1;
    da1[static_cast<std::size_t>(s) * k1 + c.amax1[s]] -= g1;
    const double g2 = dq2[s];
    dv[s] += g2;
    da2[static_cast<std::size_t>(s) * k2 + a2_idx[s]] += g2;
    da2[static_cast<std::size_t>(s) * k2 + c.amax2[s]] -= g2;
  }

  std::vector<double> dh2(static_cast<std::size_t>(batch) * n2, 0.0);
  std::vector<double> dhid(static_cast<std::size_t>(batch) * nh);
  std::vector<double> dh2_part(static_cast<std::size_t>(batch) * n2);

  // value head
  linear_backward(value_out, c.hv.data(), dv.data(), batch, dhid.data(), grad.value_out);
  relu_backward_inplace(c.hv.data(), dhid.data(), dhid.size());
  linear_backward(value_hidden, c.h2.data(), dhid.data(), batch, dh2_part.data(),
                  grad.value_hidden);
  for (std::size_t i = 0; i < dh2.size(); ++i) dh2[i] += dh2_part[i];

  // transport advantage head
  linear_backward(adv1_out, c.ha1.data(), da1.data(), batch, dhid.data(), grad.adv1_out);
  relu_backward_inplace(c.ha1.data(), dhid.data(), dhid.size());
  linear_backward(adv1_hidden, c.h2.data(), dhid.data(), batch, dh2_part.data(),
                  grad.adv1_hidden);
  for (std::size_t i = 0; i < dh2.size(); ++i) dh2[i] += dh2_part[i];

  // association advantage head
  linear_backward(adv2_out, c.ha2.data(), da2.data(), batch, dhid.data(), grad.adv2_out);
  relu_backward_inplace(c.ha2.data(), dhid.data(), dhid.size());
  linear_backward(adv2_hidden, c.h2.data(), dhid.data(), batch, dh2_part.data(),
                  grad.adv2_hidden);
  for (std::size_t i = 0; i < dh2.size(); ++i) dh2[i] += dh2_part[i];

  // trunk
  if (opt.relu_second_trunk_layer) {
    relu_backward_inplace(c.h2.data(), dh2.data(), dh2.size());
  }
  std::vector<double> dh1(static_cast<std::size_t>(batch) * n1);
  linear_backward(trunk2, c.h1.data(), dh2.data(), batch, dh1.data(), grad.trunk2);
  relu_backward_inplace(c.h1.data(), dh1.data(), dh1.size());
  linear_backward(trunk1, c.x.data(), dh1.data(), batch, nullptr, grad.trunk1);
}

void BranchingNet::zero_like(const BranchingNet& other) {
  opt = other.opt;
  trunk1.zero_like(other.trunk1);
  trunk2.zero_like(other.trunk2);
  value_hidden.zero_like(other.value_hidden);
  value_out.zero_like(other.value_out);
  adv1_hidden.zero_like(other.adv1_hidden);
  adv1_out.zero_like(other.adv1_out);
  adv2_hidden.zero_like(other.adv2_hidden);
  adv2_out.zero_like(other.adv2_out);
}

void BranchingNet::set_zero() {
  for (auto* arr : param_arrays()) std::fill(arr->begin(), arr->end(), 0.0);
}

std::vector<std::vector<double>*> BranchingNet::param_arrays() {
  return {&trunk1.w,       &trunk1.b,       &trunk2.w,     &trunk2.b,
          &value_hidden.w, &value_hidden.b, &value_out.w,  &value_out.b,
          &adv1_hidden.w,  &adv1_hidden.b,  &adv1_out.w,   &adv1_out.b,
          &adv2_hidden.w,  &adv2_hidden.b,  &adv2_out.w,   &adv2_out.b};
}

std::vector<const std::vector<double>*> BranchingNet::param_arrays() const {
  return {&trunk1.w,       &trunk1.b,       &trunk2.w,     &trunk2.b,
          &value_hidden.w, &value_hidden.b, &value_out.w,  &value_out.b,
          &adv1_hidden.w,  &adv1_hidden.b,  &adv1_out.w,   &adv1_out.b,
          &adv2_hidden.w,  &adv2_hidden.b,  &adv2_out.w,   &adv2_out.b};
}

bool BranchingNet::all_finite() const {
  for (const auto* arr : param_arrays()) {
    for (double x : *arr) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

// --- JointNet ---------------------------------------------------------------

JointNet::JointNet(const NetOptions& o, Rng& rng) : opt(o) {
  if (o.input_size < 1) throw std::invalid_argument("JointNet: input_size must be >= 1");
  trunk1.init(o.input_size, o.trunk1_units, rng);
  trunk2.init(o.trunk1_units, o.trunk2_units, rng);
  head_hidden.init(o.trunk2_units, o.head_hidden_units, rng);
  head_out.init(o.head_hidden_units, o.transport_actions * o.assoc_actions, rng);
}

void JointNet::forward(const double* x, int batch, Cache& c) const {
  const int n1 = opt.trunk1_units, n2 = opt.trunk2_units, nh = opt.head_hidden_units;
  const int k = joint_actions();
  c.batch = batch;
  c.x.assign(x, x + static_cast<std::size_t>(batch) * opt.input_size);
  c.h1.resize(static_cast<std::size_t>(batch) * n1);
  c.h2.resize(static_cast<std::size_t>(batch) * n2);
  c.hh.resize(static_cast<std::size_t>(batch) * nh);
  c.q.resize(static_cast<std::size_t>(batch) * k);

  linear_forward(trunk1, c.x.data(), batch, c.h1.data());
  relu_inplace(c.h1.data(), c.h1.size());
  linear_forward(trunk2, c.h1.data(), batch, c.h2.data());
  if (opt.relu_second_trunk_layer) relu_inplace(c.h2.data(), c.h2.size());
  linear_forward(head_hidden, c.h2.data(), batch, c.hh.data());
  relu_inplace(c.hh.data(), c.hh.size());
  linear_forward(head_out, c.hh.data(), batch, c.q.data());
}

std::vector<double> JointNet::forward_one(const std::vector<double>& obs) const {
  if (static_cast<int>(obs.size()) != opt.input_size) {
    throw std::invalid_argument("JointNet::forward_one: observation size mismatch");
  }
  Cache c;
  forward(obs.data(), 1, c);
  return c.q;
}

void JointNet::backward(const Cache& c, const std::vector<int>& a_idx,
                        const std::vector<double>& dq, JointNet& grad) const {
  const int batch = c.batch;
  const int k = joint_actions();
  std::vector<double> dqs(static_cast<std::size_t>(batch) * k, 0.0);
  for (int s = 0; s < batch; ++s) {
    dqs[static_cast<std::size_t>(s) * k + a_idx[s]] = dq[s];
  }
  std::vector<double> dhh(static_cast<std::size_t>(batch) * opt.head_hidden_units);
  linear_backward(head_out, c.hh.data(), dqs.data(), batch, dhh.data(), grad.head_out);
  relu_backward_inplace(c.hh.data(), dhh.data(), dhh.size());
  std::vector<double> dh2(static_cast<std::size_t>(batch) * opt.trunk2_units);
  linear_backward(head_hidden, c.h2.data(), dhh.data(), batch, dh2.data(), grad.head_hidden);
  if (opt.relu_second_trunk_layer) {
    relu_backward_inplace(c.h2.data(), dh2.data(), dh2.size());
  }
  std::vector<double> dh1(static_cast<std::size_t>(batch) * opt.trunk1_units);
  linear_backward(trunk2, c.h1.data(), dh2.data(), batch, dh1.data(), grad.trunk2);
  relu_backward_inplace(c.h1.data(), dh1.data(), dh1.size());
  linear_backward(trunk1, c.x.data(), dh1.data(), batch, nullptr, grad.trunk1);
}

void JointNet::zero_like(const JointNet& other) {
  opt = other.opt;
  trunk1.zero_like(other.trunk1);
  trunk2.zero_like(other.trunk2);
  head_hidden.zero_like(other.head_hidden);
  head_out.zero_like(other.head_out);
}

void JointNet::set_zero() {
  for (auto* arr : param_arrays()) std::fill(arr->begin(), arr->end(), 0.0);
}

std::vector<std::vector<double>*> JointNet::param_arrays() {
  return {&trunk1.w, &trunk1.b, &trunk2.w, &trunk2.b,
          &head_hidden.w, &head_hidden.b, &head_out.w, &head_out.b};
}

std::vector<const std::vector<double>*> JointNet::param_arrays() const {
  return {&trunk1.w, &trunk1.b, &trunk2.w, &trunk2.b,
          &head_hidden.w, &head_hidden.b, &head_out.w, &head_out.b};
}

bool JointNet::all_finite() const {
  for (const auto* arr : param_arrays()) {
    for (double x : *arr) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

// --- optimizer --------------------------------------------------------------

void AdamState::init_for(const std::vector<const std::vector<double>*>& params) {
  m.clear();
  v.clear();
  m.reserve(params.size());
  v.reserve(params.size());
  for (const auto* p : params) {
    m.emplace_back(p->size(), 0.0);
    v.emplace_back(p->size(), 0.0);
  }
  t = 0;
}

void optimizer_step(std::vector<std::vector<double>*> params,
                    const std::vector<const std::vector<double>*>& grads,
                    AdamState& state, const OptimizerConfig& cfg) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("optimizer_step: param/grad count mismatch");
  }
  if (cfg.kind == OptimizerConfig::Kind::kSgd) {
    for (std::size_t a = 0; a < params.size(); ++a) {
      auto& p = *params[a];
      const auto& g = *grads[a];
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= cfg.lr * g[i];
    }
    return;
  }
  if (state.m.size() != params.size()) {
    throw std::invalid_argument("optimizer_step: Adam state not initialized for params");
  }
  ++state.t;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t a = 0; a < params.size(); ++a) {
    auto& p = *params[a];
    const auto& g = *grads[a];
    auto& m = state.m[a];
    auto& v = state.v[a];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

}  // namespace uavnet
