#include <cmath>
#include <random>

#include "lrfnet/error.hpp"
#include "lrfnet/regress.hpp"

namespace lrfnet {

MlpNet::MlpNet(std::size_t inputs, std::vector<std::size_t> hidden) : inputs_(inputs), hidden_(std::move(hidden)) {
  if (inputs_ == 0 || hidden_.empty()) throw Error(ErrorKind::InvalidArgument, "mlp needs inputs and a hidden layer");
  std::size_t at = 0;
  std::size_t fan_in = inputs_;
  for (std::size_t h : hidden_) {
    offsets_.push_back(at);
    at += h * fan_in + h;
    fan_in = h;
  }
  offsets_.push_back(at);
  at += hidden_.back() + inputs_ + 1;
  params_.assign(at, 0.0);
}

double MlpNet::forward(std::span<const double> x) const {
  std::vector<double> prev(x.begin(), x.end());
  std::vector<double> cur;
  std::size_t fan_in = inputs_;
  for (std::size_t l = 0; l < hidden_.size(); ++l) {
    const double* w = params_.data() + offsets_[l];
    const double* b = w + hidden_[l] * fan_in;
    cur.assign(hidden_[l], 0.0);
    for (std::size_t u = 0; u < hidden_[l]; ++u) {
      double z = b[u];
      for (std::size_t k = 0; k < fan_in; ++k) z += w[u * fan_in + k] * prev[k];
      cur[u] = std::tanh(z);
    }
    prev.swap(cur);
    fan_in = hidden_[l];
  }
  double out = params_[bias_offset()];
  for (std::size_t u = 0; u < hidden_.back(); ++u) out += params_[output_offset() + u] * prev[u];
  for (std::size_t k = 0; k < inputs_; ++k) out += params_[skip_offset() + k] * x[k];
  return out;
}

double MlpNet::loss(const Matrix& x, std::span<const double> y, std::vector<double>* grad) const {
  const std::size_t n = x.rows();
  if (n == 0 || y.size() != n || x.cols() != inputs_) {
    throw Error(ErrorKind::DimensionMismatch, "mlp loss: data does not match the network");
  }
  if (grad) grad->assign(params_.size(), 0.0);

  const std::size_t layers = hidden_.size();
  std::vector<std::vector<double>> act(layers + 1);
  std::vector<double> delta, next_delta;
  double total = 0.0;

  for (std::size_t r = 0; r < n; ++r) {
    const auto xr = x.row(r);
    act[0].assign(xr.begin(), xr.end());
    std::size_t fan_in = inputs_;
    for (std::size_t l = 0; l < layers; ++l) {
      const double* w = params_.data() + offsets_[l];
      const double* b = w + hidden_[l] * fan_in;
      act[l + 1].assign(hidden_[l], 0.0);
      for (std::size_t u = 0; u < hidden_[l]; ++u) {
        double z = b[u];
        for (std::size_t k = 0; k < fan_in; ++k) z += w[u * fan_in + k] * act[l][k];
        act[l + 1][u] = std::tanh(z);
      }
      fan_in = hidden_[l];
    }
    double out = params_[bias_offset()];
    for (std::size_t u = 0; u < hidden_.back(); ++u) out += params_[output_offset() + u] * act[layers][u];
    for (std::size_t k = 0; k < inputs_; ++k) out += params_[skip_offset() + k] * xr[k];

    const double err = out - y[r];
    total += err * err;
    if (!grad) continue;

    auto& g = *grad;
    const double dout = 2.0 * err / static_cast<double>(n);
    g[bias_offset()] += dout;
    for (std::size_t k = 0; k < inputs_; ++k) g[skip_offset() + k] += dout * xr[k];
    delta.assign(hidden_.back(), 0.0);
    for (std::size_t u = 0; u < hidden_.back(); ++u) {
      g[output_offset() + u] += dout * act[layers][u];
      const double a = act[layers][u];
      delta[u] = dout * params_[output_offset() + u] * (1.0 - a * a);
    }
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t fin = l == 0 ? inputs_ : hidden_[l - 1];
      const double* w = params_.data() + offsets_[l];
      double* gw = g.data() + offsets_[l];
      double* gb = gw + hidden_[l] * fin;
      for (std::size_t u = 0; u < hidden_[l]; ++u) {
        gb[u] += delta[u];
        for (std::size_t k = 0; k < fin; ++k) gw[u * fin + k] += delta[u] * act[l][k];
      }
      if (l == 0) break;
      next_delta.assign(fin, 0.0);
      for (std::size_t k = 0; k < fin; ++k) {
        double s = 0.0;
        for (std::size_t u = 0; u < hidden_[l]; ++u) s += w[u * fin + k] * delta[u];
        const double a = act[l][k];
        next_delta[k] = s * (1.0 - a * a);
      }
      delta.swap(next_delta);
    }
  }
  return total / static_cast<double>(n);
}

double MlpModel::predict(std::span<const double> x) const {
  std::vector<double> xs(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) xs[k] = (x[k] - x_mean[k]) / x_scale[k];
  return net.forward(xs) * y_scale + y_mean;
}

namespace {

void standardize_columns(const Matrix& x, MlpModel& m, Matrix& out) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  m.x_mean.assign(d, 0.0);
  m.x_scale.assign(d, 1.0);
  out = Matrix(n, d);
  for (std::size_t c = 0; c < d; ++c) {
    double mu = 0.0;
    for (std::size_t r = 0; r < n; ++r) mu += x(r, c);
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) var += (x(r, c) - mu) * (x(r, c) - mu);
    const double sd = std::sqrt(var / static_cast<double>(n));
    m.x_mean[c] = mu;
    m.x_scale[c] = sd > 0.0 ? sd : 1.0;
    for (std::size_t r = 0; r < n; ++r) out(r, c) = (x(r, c) - mu) / m.x_scale[c];
  }
}

}  // namespace

Regressor fit_mlp(const Matrix& x, std::span<const double> y, const MlpParams& p, std::uint64_t seed) {
  p.validate();
  const std::size_t n = x.rows();
  if (n < 2 || y.size() != n) throw Error(ErrorKind::EmptyData, "mlp backend needs at least 2 rows with targets");

  MlpModel model;
  model.params = p;
  Matrix xs;
  standardize_columns(x, model, xs);

  double mu = 0.0;
  for (double v : y) mu += v;
  mu /= static_cast<double>(n);
  double var = 0.0;
  for (double v : y) var += (v - mu) * (v - mu);
  const double sd = std::sqrt(var / static_cast<double>(n));
  model.y_mean = mu;
  model.y_scale = sd > 0.0 ? sd : 1.0;
  std::vector<double> ys(n);
  for (std::size_t r = 0; r < n; ++r) ys[r] = (y[r] - mu) / model.y_scale;

  std::vector<std::size_t> hidden(p.hidden_sizes.begin(), p.hidden_sizes.end());
  MlpNet net(x.cols(), hidden);
  auto& theta = net.mutable_params();

  // Hidden layers: uniform(-0.5, 0.5) / sqrt(fan_in). The tanh branch's
  // output weights start at zero and the skip path at the least-squares fit,
  // so training starts from the linear solution and only lowers the loss.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  std::size_t fan_in = x.cols();
  for (std::size_t l = 0; l < hidden.size(); ++l) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    const std::size_t count = hidden[l] * fan_in + hidden[l];
    for (std::size_t k = 0; k < count; ++k) theta[net.weight_offset(l) + k] = unif(rng) * scale;
    fan_in = hidden[l];
  }
  const LinearFit lin = least_squares(xs, ys, 0.0);
  for (std::size_t k = 0; k < x.cols(); ++k) theta[net.skip_offset() + k] = lin.coef[k];
  theta[net.bias_offset()] = lin.intercept;

  std::vector<double> grad;
  double loss = net.loss(xs, ys, &grad);
  if (!std::isfinite(loss)) throw Error(ErrorKind::NonFinite, "mlp initial loss is not finite");

  constexpr int kPatience = 50;
  std::vector<double> history{loss};
  double lr = p.learning_rate;
  const double lr_floor = p.learning_rate * 1e-12;
  std::vector<double> candidate;
  std::vector<double> cand_grad;
  int epoch = 0;
  for (; epoch < p.max_epochs; ++epoch) {
    candidate = theta;
    for (std::size_t k = 0; k < theta.size(); ++k) candidate[k] -= lr * grad[k];
    MlpNet trial = net;
    trial.mutable_params() = candidate;
    const double next = trial.loss(xs, ys, &cand_grad);
    if (std::isfinite(next) && next <= loss) {
      net = std::move(trial);
      loss = next;
      grad.swap(cand_grad);
    } else {
      lr *= 0.5;  // geometric decay on a rejected step
      if (lr < lr_floor) {
        if (!std::isfinite(loss)) throw Error(ErrorKind::NonFinite, "mlp loss diverged");
        break;
      }
    }
    history.push_back(loss);
    const std::size_t h = history.size();
    if (h > kPatience && history[h - 1 - kPatience] - loss < p.tol) {
      ++epoch;
      break;
    }
  }
  model.net = std::move(net);
  model.train_mse = loss * model.y_scale * model.y_scale;
  model.epochs_run = epoch;
  return Regressor(std::move(model), x.cols(), seed);
}

}  // namespace lrfnet
