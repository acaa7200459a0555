#include <cmath>
#include <random>
#include <string>

#include "loco/error.hpp"
#include "loco/kernels.hpp"
#include "loco/rnn.hpp"

namespace loco::rnn {
namespace {

constexpr std::array<std::string_view, kTensorCount> kNames = {
    "input.weight",         "input.bias",           "gru.update.input",
    "gru.update.recurrent", "gru.update.bias",      "gru.reset.input",
    "gru.reset.recurrent",  "gru.reset.bias",       "gru.candidate.input",
    "gru.candidate.recurrent", "gru.candidate.bias", "head.weight",
    "head.bias",
};

double sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

ModelParams::ModelParams(ModelDims dims) : dims_(dims) {
  if (dims.input == 0 || dims.hidden == 0 || dims.channels == 0) {
    throw InvalidInput("model dimensions must be positive");
  }
  const std::size_t in = dims.input, hid = dims.hidden, ch = dims.channels;
  const std::array<std::pair<std::size_t, std::size_t>, kTensorCount> shapes = {{
      {hid, in}, {1, hid},              //
      {hid, hid}, {hid, hid}, {1, hid},  // update gate
      {hid, hid}, {hid, hid}, {1, hid},  // reset gate
      {hid, hid}, {hid, hid}, {1, hid},  // candidate
      {ch, hid}, {1, ch},
  }};
  std::size_t offset = 0;
  for (std::size_t i = 0; i < kTensorCount; ++i) {
    layout_[i] = TensorInfo{kNames[i], shapes[i].first, shapes[i].second, offset};
    offset += layout_[i].size();
  }
  data_.assign(offset, 0.0);
}

std::span<double> ModelParams::tensor(Tensor t) {
  const TensorInfo& ti = info(t);
  return std::span<double>(data_).subspan(ti.offset, ti.size());
}

std::span<const double> ModelParams::tensor(Tensor t) const {
  const TensorInfo& ti = info(t);
  return std::span<const double>(data_).subspan(ti.offset, ti.size());
}

ModelParams init_params(ModelDims dims, const InitOptions& opts) {
  ModelParams params(dims);
  std::mt19937_64 rng(opts.seed);
  auto fill_uniform = [&](Tensor t, std::size_t fan_in) {
    const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-s, s);
    for (double& v : params.tensor(t)) v = dist(rng);
  };
  fill_uniform(Tensor::kInputWeight, dims.input);
  fill_uniform(Tensor::kUpdateInput, dims.hidden);
  fill_uniform(Tensor::kUpdateRecurrent, dims.hidden);
  fill_uniform(Tensor::kResetInput, dims.hidden);
  fill_uniform(Tensor::kResetRecurrent, dims.hidden);
  fill_uniform(Tensor::kCandidateInput, dims.hidden);
  fill_uniform(Tensor::kCandidateRecurrent, dims.hidden);
  const double bias = loss::init_bias(opts.omega, opts.reference_length);
  for (double& v : params.tensor(Tensor::kHeadBias)) v = bias;
  return params;
}

ForwardResult forward(const ModelParams& params, const Matrix& x) {
  const ModelDims& d = params.dims();
  if (x.rows == 0) throw InvalidInput("input sequence is empty");
  if (x.cols != d.input) {
    throw InvalidInput("input has " + std::to_string(x.cols) + " features, model expects " +
                       std::to_string(d.input));
  }
  const auto& k = kernels::active();
  const std::size_t steps = x.rows, hid = d.hidden, ch = d.channels;

  ForwardResult out;
  ForwardCache& cache = out.cache;
  cache.dims = d;
  cache.steps = steps;
  cache.x = x;
  cache.a = Matrix(steps, hid);
  cache.z = Matrix(steps, hid);
  cache.r = Matrix(steps, hid);
  cache.c = Matrix(steps, hid);
  cache.h = Matrix(steps + 1, hid);
  cache.logits = Matrix(steps, ch);
  cache.probs = Matrix(steps, ch);

  const double* w_in = params.tensor(Tensor::kInputWeight).data();
  const auto b_in = params.tensor(Tensor::kInputBias);
  const double* w_z = params.tensor(Tensor::kUpdateInput).data();
  const double* u_z = params.tensor(Tensor::kUpdateRecurrent).data();
  const auto b_z = params.tensor(Tensor::kUpdateBias);
  const double* w_r = params.tensor(Tensor::kResetInput).data();
  const double* u_r = params.tensor(Tensor::kResetRecurrent).data();
  const auto b_r = params.tensor(Tensor::kResetBias);
  const double* w_c = params.tensor(Tensor::kCandidateInput).data();
  const double* u_c = params.tensor(Tensor::kCandidateRecurrent).data();
  const auto b_c = params.tensor(Tensor::kCandidateBias);
  const double* w_o = params.tensor(Tensor::kHeadWeight).data();
  const auto b_o = params.tensor(Tensor::kHeadBias);

  std::vector<double> gated(hid);
  for (std::size_t t = 0; t < steps; ++t) {
    const double* h_prev = cache.h.row(t).data();

    auto a = cache.a.row(t);
    std::copy(b_in.begin(), b_in.end(), a.begin());
    k.gemv(w_in, x.row(t).data(), a.data(), hid, d.input);
    for (double& v : a) v = std::tanh(v);

    auto z = cache.z.row(t);
    std::copy(b_z.begin(), b_z.end(), z.begin());
    k.gemv(w_z, a.data(), z.data(), hid, hid);
    k.gemv(u_z, h_prev, z.data(), hid, hid);
    for (double& v : z) v = sigmoid(v);

    auto r = cache.r.row(t);
    std::copy(b_r.begin(), b_r.end(), r.begin());
    k.gemv(w_r, a.data(), r.data(), hid, hid);
    k.gemv(u_r, h_prev, r.data(), hid, hid);
    for (double& v : r) v = sigmoid(v);

    for (std::size_t j = 0; j < hid; ++j) gated[j] = r[j] * h_prev[j];
    auto c = cache.c.row(t);
    std::copy(b_c.begin(), b_c.end(), c.begin());
    k.gemv(w_c, a.data(), c.data(), hid, hid);
    k.gemv(u_c, gated.data(), c.data(), hid, hid);
    for (double& v : c) v = std::tanh(v);

    auto h = cache.h.row(t + 1);
    for (std::size_t j = 0; j < hid; ++j) h[j] = (1.0 - z[j]) * h_prev[j] + z[j] * c[j];

    auto logit = cache.logits.row(t);
    std::copy(b_o.begin(), b_o.end(), logit.begin());
    k.gemv(w_o, h.data(), logit.data(), ch, hid);
    auto p = cache.probs.row(t);
    for (std::size_t j = 0; j < ch; ++j) p[j] = sigmoid(logit[j]);
  }
  out.probs = cache.probs;
  return out;
}

Matrix predict(const ModelParams& params, const Matrix& x) {
  return forward(params, x).probs;
}

Gradients backward(const ModelParams& params, const ForwardCache& cache,
                   const Matrix& dloss_dprob) {
  const ModelDims& d = params.dims();
  if (!(cache.dims == d)) throw InvalidState("forward cache was produced by a different model shape");
  if (cache.steps == 0 || cache.h.rows != cache.steps + 1) {
    throw InvalidState("forward cache is empty or inconsistent");
  }
  if (dloss_dprob.rows != cache.steps || dloss_dprob.cols != d.channels) {
    throw InvalidState("loss gradient shape does not match the forward cache");
  }
  const auto& k = kernels::active();
  const std::size_t steps = cache.steps, hid = d.hidden, ch = d.channels, in = d.input;

  Gradients g(d);
  double* gw_in = g.tensor(Tensor::kInputWeight).data();
  double* gb_in = g.tensor(Tensor::kInputBias).data();
  double* gw_z = g.tensor(Tensor::kUpdateInput).data();
  double* gu_z = g.tensor(Tensor::kUpdateRecurrent).data();
  double* gb_z = g.tensor(Tensor::kUpdateBias).data();
  double* gw_r = g.tensor(Tensor::kResetInput).data();
  double* gu_r = g.tensor(Tensor::kResetRecurrent).data();
  double* gb_r = g.tensor(Tensor::kResetBias).data();
  double* gw_c = g.tensor(Tensor::kCandidateInput).data();
  double* gu_c = g.tensor(Tensor::kCandidateRecurrent).data();
  double* gb_c = g.tensor(Tensor::kCandidateBias).data();
  double* gw_o = g.tensor(Tensor::kHeadWeight).data();
  double* gb_o = g.tensor(Tensor::kHeadBias).data();

  const double* w_z = params.tensor(Tensor::kUpdateInput).data();
  const double* u_z = params.tensor(Tensor::kUpdateRecurrent).data();
  const double* w_r = params.tensor(Tensor::kResetInput).data();
  const double* u_r = params.tensor(Tensor::kResetRecurrent).data();
  const double* w_c = params.tensor(Tensor::kCandidateInput).data();
  const double* u_c = params.tensor(Tensor::kCandidateRecurrent).data();
  const double* w_o = params.tensor(Tensor::kHeadWeight).data();

  std::vector<double> dh(hid, 0.0), dh_prev(hid), dlogit(ch), gated(hid), dgated(hid);
  std::vector<double> dc_pre(hid), dz_pre(hid), dr_pre(hid), da(hid);

  for (std::size_t t = steps; t-- > 0;) {
    const auto a = cache.a.row(t);
    const auto z = cache.z.row(t);
    const auto r = cache.r.row(t);
    const auto c = cache.c.row(t);
    const auto h = cache.h.row(t + 1);
    const auto h_prev = cache.h.row(t);
    const auto p = cache.probs.row(t);
    const auto dp = dloss_dprob.row(t);

    for (std::size_t j = 0; j < ch; ++j) dlogit[j] = dp[j] * p[j] * (1.0 - p[j]);
    k.ger(gw_o, dlogit.data(), h.data(), ch, hid);
    for (std::size_t j = 0; j < ch; ++j) gb_o[j] += dlogit[j];
    k.gemv_t(w_o, dlogit.data(), dh.data(), ch, hid);  // dh already holds the carry from t+1

    for (std::size_t j = 0; j < hid; ++j) {
      dh_prev[j] = dh[j] * (1.0 - z[j]);
      dc_pre[j] = dh[j] * z[j] * (1.0 - c[j] * c[j]);
      dz_pre[j] = dh[j] * (c[j] - h_prev[j]) * z[j] * (1.0 - z[j]);
      gated[j] = r[j] * h_prev[j];
    }

    // candidate
    k.ger(gw_c, dc_pre.data(), a.data(), hid, hid);
    k.ger(gu_c, dc_pre.data(), gated.data(), hid, hid);
    k.axpy(1.0, dc_pre.data(), gb_c, hid);
    std::fill(dgated.begin(), dgated.end(), 0.0);
    k.gemv_t(u_c, dc_pre.data(), dgated.data(), hid, hid);
    for (std::size_t j = 0; j < hid; ++j) {
      dr_pre[j] = dgated[j] * h_prev[j] * r[j] * (1.0 - r[j]);
      dh_prev[j] += dgated[j] * r[j];
    }
    std::fill(da.begin(), da.end(), 0.0);
    k.gemv_t(w_c, dc_pre.data(), da.data(), hid, hid);

    // update gate
    k.ger(gw_z, dz_pre.data(), a.data(), hid, hid);
    k.ger(gu_z, dz_pre.data(), h_prev.data(), hid, hid);
    k.axpy(1.0, dz_pre.data(), gb_z, hid);
    k.gemv_t(u_z, dz_pre.data(), dh_prev.data(), hid, hid);
    k.gemv_t(w_z, dz_pre.data(), da.data(), hid, hid);

    // reset gate
    k.ger(gw_r, dr_pre.data(), a.data(), hid, hid);
    k.ger(gu_r, dr_pre.data(), h_prev.data(), hid, hid);
    k.axpy(1.0, dr_pre.data(), gb_r, hid);
    k.gemv_t(u_r, dr_pre.data(), dh_prev.data(), hid, hid);
    k.gemv_t(w_r, dr_pre.data(), da.data(), hid, hid);

    // input projection
    for (std::size_t j = 0; j < hid; ++j) da[j] *= 1.0 - a[j] * a[j];
    k.ger(gw_in, da.data(), cache.x.row(t).data(), hid, in);
    k.axpy(1.0, da.data(), gb_in, hid);

    dh.swap(dh_prev);
  }
  return g;
}

}  // namespace loco::rnn
