#include "baseplace/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "baseplace/io.hpp"

namespace baseplace {

// ---------------------------------------------------------------- Normalizer

Normalizer::Normalizer(const BaseRange& r) : range_(r) { range_.validate(); }

Vec3 Normalizer::normalize(const BasePose& b) const {
  const auto axes = range_.axes();
  const double v[3] = {b.x, b.y, b.theta};
  Vec3 n;
  for (int i = 0; i < 3; ++i) n[i] = 2.0 * (v[i] - axes[i].lo) / axes[i].span() - 1.0;
  return n;
}

BasePose Normalizer::denormalize(const Vec3& n) const {
  const auto axes = range_.axes();
  double v[3];
  for (int i = 0; i < 3; ++i) v[i] = axes[i].lo + 0.5 * (n[i] + 1.0) * axes[i].span();
  return BasePose(v[0], v[1], v[2]);
}

bool Normalizer::in_range(const BasePose& b) const { return range_.contains(b); }

// ---------------------------------------------------------------- MlpNetwork

template <typename Scalar>
MlpNetwork<Scalar>::MlpNetwork(const std::vector<int>& widths, std::mt19937_64& rng)
    : widths_(widths) {
  if (widths_.size() < 2) throw std::invalid_argument("MLP needs at least input and output widths");
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const int fan_in = widths_[l], fan_out = widths_[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    Matrix w(fan_out, fan_in);
    for (int c = 0; c < fan_in; ++c)
      for (int r = 0; r < fan_out; ++r) w(r, c) = static_cast<Scalar>(u(rng));
    Vector b(fan_out);
    for (int r = 0; r < fan_out; ++r) b[r] = static_cast<Scalar>(u(rng));
    w_.push_back(std::move(w));
    b_.push_back(std::move(b));
  }
}

template <typename Scalar>
std::size_t MlpNetwork<Scalar>::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < w_.size(); ++l) n += w_[l].size() + b_[l].size();
  return n;
}

template <typename Scalar>
typename MlpNetwork<Scalar>::Matrix MlpNetwork<Scalar>::forward(const Matrix& inputs) const {
  Matrix a = inputs;
  Matrix z;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    z.noalias() = w_[l] * a;
    z.colwise() += b_[l];
    if (l + 1 < w_.size())
      a = z.cwiseMax(Scalar(0));
    else
      a.swap(z);
  }
  return a;
}

template <typename Scalar>
Scalar MlpNetwork<Scalar>::loss(const Matrix& inputs, const Matrix& targets) const {
  const Matrix diff = forward(inputs) - targets;
  return diff.squaredNorm() / static_cast<Scalar>(diff.cols());
}

template <typename Scalar>
Scalar MlpNetwork<Scalar>::loss_and_gradient(const Matrix& inputs, const Matrix& targets,
                                             std::vector<Matrix>& grad_w,
                                             std::vector<Vector>& grad_b) const {
  const std::size_t layers = w_.size();
  z_.resize(layers);
  a_.resize(layers);
  grad_w.resize(layers);
  grad_b.resize(layers);

  const Matrix* prev = &inputs;
  for (std::size_t l = 0; l < layers; ++l) {
    z_[l].noalias() = w_[l] * (*prev);
    z_[l].colwise() += b_[l];
    if (l + 1 < layers) {
      a_[l] = z_[l].cwiseMax(Scalar(0));
      prev = &a_[l];
    }
  }
  const auto batch = static_cast<Scalar>(inputs.cols());
  Matrix delta = z_[layers - 1] - targets;
  const Scalar loss = delta.squaredNorm() / batch;
  delta *= Scalar(2) / batch;

  for (std::size_t l = layers; l-- > 0;) {
    const Matrix& below = l == 0 ? inputs : a_[l - 1];
    grad_w[l].noalias() = delta * below.transpose();
    grad_b[l] = delta.rowwise().sum();
    if (l == 0) break;
    Matrix back;
    back.noalias() = w_[l].transpose() * delta;
    delta = back.cwiseProduct((z_[l - 1].array() > Scalar(0)).template cast<Scalar>().matrix());
  }
  return loss;
}

template <typename Scalar>
std::vector<Scalar> MlpNetwork<Scalar>::flat_parameters() const {
  std::vector<Scalar> p;
  p.reserve(parameter_count());
  for (std::size_t l = 0; l < w_.size(); ++l) {
    p.insert(p.end(), w_[l].data(), w_[l].data() + w_[l].size());
    p.insert(p.end(), b_[l].data(), b_[l].data() + b_[l].size());
  }
  return p;
}

template <typename Scalar>
void MlpNetwork<Scalar>::set_flat_parameters(std::span<const Scalar> p) {
  if (p.size() != parameter_count()) throw std::invalid_argument("parameter vector size mismatch");
  std::size_t k = 0;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    std::copy_n(p.data() + k, w_[l].size(), w_[l].data());
    k += w_[l].size();
    std::copy_n(p.data() + k, b_[l].size(), b_[l].data());
    k += b_[l].size();
  }
}

template class MlpNetwork<float>;
template class MlpNetwork<double>;

// ---------------------------------------------------------------- training

namespace {

template <typename Scalar>
struct AdamState {
  using Net = MlpNetwork<Scalar>;
  std::vector<typename Net::Matrix> mw, vw;
  std::vector<typename Net::Vector> mb, vb;
  long step = 0;

  explicit AdamState(const Net& net) {
    for (std::size_t l = 0; l < net.weights().size(); ++l) {
      mw.push_back(Net::Matrix::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
      vw.push_back(mw.back());
      mb.push_back(Net::Vector::Zero(net.biases()[l].size()));
      vb.push_back(mb.back());
    }
  }

  template <typename P, typename G, typename M>
  static void update(P& param, const G& grad, M& m, M& v, Scalar b1, Scalar b2, Scalar lr_hat,
                     Scalar eps_hat) {
    m = b1 * m + (Scalar(1) - b1) * grad;
    v = b2 * v + (Scalar(1) - b2) * grad.cwiseAbs2();
    param.array() -= lr_hat * m.array() / (v.array().sqrt() + eps_hat);
  }

  void apply(Net& net, const std::vector<typename Net::Matrix>& gw,
             const std::vector<typename Net::Vector>& gb, const MlpHyperParams& hp) {
    ++step;
    const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(step));
    // lr * m_hat / (sqrt(v_hat) + eps), folded into the raw moments
    const auto lr_hat = static_cast<Scalar>(hp.learning_rate * std::sqrt(bc2) / bc1);
    const auto eps_hat = static_cast<Scalar>(hp.epsilon * std::sqrt(bc2));
    const auto b1 = static_cast<Scalar>(hp.beta1), b2 = static_cast<Scalar>(hp.beta2);
    for (std::size_t l = 0; l < gw.size(); ++l) {
      update(net.weights()[l], gw[l], mw[l], vw[l], b1, b2, lr_hat, eps_hat);
      update(net.biases()[l], gb[l], mb[l], vb[l], b1, b2, lr_hat, eps_hat);
    }
  }
};

Standardizer fit_standardizer(std::span<const SampleRow> rows) {
  double mean = 0.0;
  for (const auto& r : rows) mean += r.score;
  mean /= static_cast<double>(rows.size());
  double var = 0.0;
  for (const auto& r : rows) var += (r.score - mean) * (r.score - mean);
  var /= static_cast<double>(rows.size());
  const double sd = std::sqrt(var);
  return {mean, sd > 1e-12 ? sd : 1.0};
}

}  // namespace

DatasetSplit split_dataset(std::span<const SampleRow> rows, double holdout_fraction,
                           std::uint64_t seed) {
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0))
    throw std::invalid_argument("holdout_fraction must lie in [0, 1)");
  std::vector<std::size_t> idx(rows.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto rng = stream_rng(seed, 0x5b117);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_test =
      static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(rows.size())));
  DatasetSplit s;
  for (std::size_t k = 0; k < idx.size(); ++k)
    (k < n_test ? s.test : s.train).push_back(rows[idx[k]]);
  return s;
}

std::vector<double> MlpRegressor::predict_normalized(const Eigen::Matrix3Xd& inputs) const {
  const auto out = net.forward(inputs.cast<MlpScalar>());
  std::vector<double> v(static_cast<std::size_t>(out.cols()));
  for (Eigen::Index i = 0; i < out.cols(); ++i)
    v[i] = static_cast<double>(out(0, i)) * target.stddev + target.mean;
  return v;
}

MlpRegressor train_mlp(const SampleSet& d, const MlpHyperParams& hp) {
  using Net = MlpNetwork<MlpScalar>;
  if (d.rows.size() < 10) throw std::invalid_argument("train_mlp needs at least 10 rows");
  if (hp.epochs < 1 || hp.batch_size < 1 || !(hp.learning_rate > 0.0))
    throw std::invalid_argument("invalid MLP hyperparameters");

  const DatasetSplit split = split_dataset(d.rows, hp.holdout_fraction, hp.seed);
  MlpRegressor r;
  r.normalizer = Normalizer(d.range);
  r.target = fit_standardizer(split.train);

  std::vector<int> widths = {3};
  widths.insert(widths.end(), hp.hidden.begin(), hp.hidden.end());
  widths.push_back(1);
  auto init_rng = stream_rng(hp.seed, 1);
  r.net = Net(widths, init_rng);

  const std::size_t n = split.train.size();
  Net::Matrix x(3, n), t(1, n);
  for (std::size_t i = 0; i < n; ++i) {
    x.col(i) = r.normalizer.normalize(split.train[i].base).cast<MlpScalar>();
    t(0, i) = static_cast<MlpScalar>((split.train[i].score - r.target.mean) / r.target.stddev);
  }

  AdamState<MlpScalar> adam(r.net);
  std::vector<Net::Matrix> gw;
  std::vector<Net::Vector> gb;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto shuffle_rng = stream_rng(hp.seed, 2);
  const auto batch = static_cast<std::size_t>(hp.batch_size);
  Net::Matrix xb, tb;
  r.training.hp = hp;
  r.training.epoch_loss.reserve(static_cast<std::size_t>(hp.epochs));

  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      xb.resize(3, static_cast<Eigen::Index>(len));
      tb.resize(1, static_cast<Eigen::Index>(len));
      for (std::size_t k = 0; k < len; ++k) {
        xb.col(k) = x.col(order[start + k]);
        tb(0, k) = t(0, order[start + k]);
      }
      const MlpScalar loss = r.net.loss_and_gradient(xb, tb, gw, gb);
      if (!std::isfinite(loss))
        throw TrainingError("non-finite training loss at epoch " + std::to_string(epoch + 1) +
                            "; lower the learning rate or check the score scale");
      epoch_loss += static_cast<double>(loss) * static_cast<double>(len);
      adam.apply(r.net, gw, gb, hp);
    }
    r.training.epoch_loss.push_back(epoch_loss / static_cast<double>(n));
  }
  r.training.first_epoch_loss = r.training.epoch_loss.front();
  r.training.final_loss = r.training.epoch_loss.back();
  r.training.train_rows = n;
  r.training.holdout_rows = split.test.size();
  if (split.test.size() >= 2) r.training.holdout = evaluate(Regressor(r), split.test);
  return r;
}

// ---------------------------------------------------------------- LASSO

LassoRegressor train_lasso(const SampleSet& d, double alpha) {
  if (d.rows.size() < 4) throw std::invalid_argument("train_lasso needs at least 4 rows");
  if (!(alpha >= 0.0)) throw std::invalid_argument("lasso alpha must be >= 0");
  LassoRegressor r;
  r.alpha = alpha;
  r.normalizer = Normalizer(d.range);

  const auto n = static_cast<double>(d.rows.size());
  Vec3 x_mean = Vec3::Zero();
  double y_mean = 0.0;
  for (const auto& row : d.rows) {
    x_mean += r.normalizer.normalize(row.base);
    y_mean += row.score;
  }
  x_mean /= n;
  y_mean /= n;
  Mat3 gram = Mat3::Zero();
  Vec3 corr = Vec3::Zero();
  for (const auto& row : d.rows) {
    const Vec3 xc = r.normalizer.normalize(row.base) - x_mean;
    gram += xc * xc.transpose();
    corr += xc * (row.score - y_mean);
  }
  gram /= n;
  corr /= n;

  constexpr int kMaxSweeps = 10000;
  constexpr double kTolerance = 1e-8;
  Vec3 w = Vec3::Zero();
  for (r.sweeps = 1; r.sweeps <= kMaxSweeps; ++r.sweeps) {
    double max_change = 0.0;
    for (int j = 0; j < 3; ++j) {
      double next = 0.0;
      if (gram(j, j) > 1e-15) {
        const double rho = corr[j] - gram.row(j).dot(w) + gram(j, j) * w[j];
        const double shrunk = std::max(std::abs(rho) - 0.5 * alpha, 0.0);
        next = std::copysign(shrunk, rho) / gram(j, j);
      }
      max_change = std::max(max_change, std::abs(next - w[j]));
      w[j] = next;
    }
    if (max_change < kTolerance) {
      r.converged = true;
      break;
    }
  }
  r.sweeps = std::min(r.sweeps, kMaxSweeps);
  r.weights = w;
  r.bias = y_mean - x_mean.dot(w);
  return r;
}

// ---------------------------------------------------------------- prediction

const Normalizer& normalizer_of(const Regressor& r) {
  return std::visit([](const auto& m) -> const Normalizer& { return m.normalizer; }, r);
}

Prediction predict(const Regressor& r, const BasePose& b) {
  const BasePose one[1] = {b};
  return {predict_batch(r, one).front(), !normalizer_of(r).in_range(b)};
}

std::vector<double> predict_batch(const Regressor& r, std::span<const BasePose> bases) {
  const Normalizer& norm = normalizer_of(r);
  if (const auto* lasso = std::get_if<LassoRegressor>(&r)) {
    std::vector<double> out(bases.size());
    for (std::size_t i = 0; i < bases.size(); ++i)
      out[i] = lasso->weights.dot(norm.normalize(bases[i])) + lasso->bias;
    return out;
  }
  const auto& mlp = std::get<MlpRegressor>(r);
  constexpr std::size_t kChunk = 4096;
  std::vector<double> out;
  out.reserve(bases.size());
  Eigen::Matrix3Xd x;
  for (std::size_t start = 0; start < bases.size(); start += kChunk) {
    const std::size_t len = std::min(kChunk, bases.size() - start);
    x.resize(3, static_cast<Eigen::Index>(len));
    for (std::size_t k = 0; k < len; ++k) x.col(k) = norm.normalize(bases[start + k]);
    const auto part = mlp.predict_normalized(x);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

EvalReport residual_stats(std::span<const double> residuals) {
  if (residuals.size() < 2) throw std::invalid_argument("evaluation needs at least 2 rows");
  const auto n = static_cast<double>(residuals.size());
  double sum = 0.0, sq = 0.0;
  for (double r : residuals) {
    sum += r;
    sq += r * r;
  }
  const double mean = sum / n;
  double var = 0.0;
  for (double r : residuals) var += (r - mean) * (r - mean);
  return {std::sqrt(sq / n), std::sqrt(var / n), residuals.size()};
}

EvalReport evaluate(const Regressor& r, std::span<const SampleRow> rows) {
  std::vector<BasePose> bases;
  bases.reserve(rows.size());
  for (const auto& row : rows) bases.push_back(row.base);
  const auto pred = predict_batch(r, bases);
  std::vector<double> residuals(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) residuals[i] = pred[i] - rows[i].score;
  return residual_stats(residuals);
}

// ---------------------------------------------------------------- model files

namespace {

nlohmann::json normalizer_to_json(const Normalizer& n) { return range_to_json(n.range()); }

}  // namespace

nlohmann::json regressor_to_json(const Regressor& r) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  if (const auto* lasso = std::get_if<LassoRegressor>(&r)) {
    j["kind"] = "lasso";
    j["weights"] = {lasso->weights[0], lasso->weights[1], lasso->weights[2]};
    j["bias"] = lasso->bias;
    j["alpha"] = lasso->alpha;
    j["normalizer"] = normalizer_to_json(lasso->normalizer);
    j["training"] = {{"sweeps", lasso->sweeps}, {"converged", lasso->converged}};
    return j;
  }
  const auto& mlp = std::get<MlpRegressor>(r);
  j["kind"] = "mlp";
  j["widths"] = mlp.net.widths();
  j["activation"] = "relu";
  j["scalar"] = "float32";
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < mlp.net.weights().size(); ++l) {
    const auto& w = mlp.net.weights()[l];
    std::vector<double> row_major;
    row_major.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index a = 0; a < w.rows(); ++a)
      for (Eigen::Index b = 0; b < w.cols(); ++b) row_major.push_back(w(a, b));
    const auto& bias = mlp.net.biases()[l];
    layers.push_back({{"rows", w.rows()},
                      {"cols", w.cols()},
                      {"weights", row_major},
                      {"bias", std::vector<double>(bias.data(), bias.data() + bias.size())}});
  }
  j["layers"] = layers;
  j["normalizer"] = normalizer_to_json(mlp.normalizer);
  j["target_standardizer"] = {{"mean", mlp.target.mean}, {"std", mlp.target.stddev}};
  const auto& t = mlp.training;
  j["training"] = {{"epochs", t.hp.epochs},
                   {"learning_rate", t.hp.learning_rate},
                   {"batch_size", t.hp.batch_size},
                   {"seed", t.hp.seed},
                   {"holdout_fraction", t.hp.holdout_fraction},
                   {"first_epoch_loss", t.first_epoch_loss},
                   {"final_loss", t.final_loss},
                   {"train_rows", t.train_rows},
                   {"holdout_rows", t.holdout_rows},
                   {"holdout_rmse", t.holdout.rmse},
                   {"holdout_sd", t.holdout.sd}};
  return j;
}

Regressor regressor_from_json(const nlohmann::json& j) {
  const int version = j.value("format_version", -1);
  if (version != kFormatVersion)
    throw std::runtime_error("unsupported model format_version " + std::to_string(version) +
                             " (expected " + std::to_string(kFormatVersion) + ")");
  const std::string kind = j.at("kind").get<std::string>();
  const Normalizer norm(range_from_json(j.at("normalizer")));
  if (kind == "lasso") {
    LassoRegressor r;
    const auto w = j.at("weights").get<std::vector<double>>();
    if (w.size() != 3) throw std::runtime_error("lasso model needs 3 weights");
    r.weights = Vec3(w[0], w[1], w[2]);
    r.bias = j.at("bias").get<double>();
    r.alpha = j.value("alpha", 0.5);
    r.normalizer = norm;
    if (j.contains("training")) {
      r.sweeps = j["training"].value("sweeps", 0);
      r.converged = j["training"].value("converged", false);
    }
    return r;
  }
  if (kind != "mlp") throw std::runtime_error("unknown model kind '" + kind + "'");
  if (j.value("activation", std::string("relu")) != "relu")
    throw std::runtime_error("only relu activation is supported");
  MlpRegressor r;
  const auto widths = j.at("widths").get<std::vector<int>>();
  std::mt19937_64 rng(0);
  r.net = MlpNetwork<MlpScalar>(widths, rng);
  const auto& layers = j.at("layers");
  if (layers.size() != widths.size() - 1) throw std::runtime_error("layer count mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& w = r.net.weights()[l];
    auto& b = r.net.biases()[l];
    const auto vals = layers[l].at("weights").get<std::vector<double>>();
    const auto bias = layers[l].at("bias").get<std::vector<double>>();
    if (vals.size() != static_cast<std::size_t>(w.size()) ||
        bias.size() != static_cast<std::size_t>(b.size()))
      throw std::runtime_error("layer " + std::to_string(l) + " has the wrong shape");
    std::size_t k = 0;
    for (Eigen::Index a = 0; a < w.rows(); ++a)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(a, c) = static_cast<MlpScalar>(vals[k++]);
    for (Eigen::Index a = 0; a < b.size(); ++a) b[a] = static_cast<MlpScalar>(bias[a]);
  }
  r.normalizer = norm;
  r.target.mean = j.at("target_standardizer").at("mean").get<double>();
  r.target.stddev = j.at("target_standardizer").at("std").get<double>();
  if (j.contains("training")) {
    const auto& t = j["training"];
    r.training.hp.epochs = t.value("epochs", 0);
    r.training.hp.learning_rate = t.value("learning_rate", 0.0);
    r.training.hp.batch_size = t.value("batch_size", 0);
    r.training.hp.seed = t.value("seed", std::uint64_t{0});
    r.training.hp.holdout_fraction = t.value("holdout_fraction", 0.0);
    r.training.first_epoch_loss = t.value("first_epoch_loss", 0.0);
    r.training.final_loss = t.value("final_loss", 0.0);
    r.training.train_rows = t.value("train_rows", std::size_t{0});
    r.training.holdout_rows = t.value("holdout_rows", std::size_t{0});
    r.training.holdout.rmse = t.value("holdout_rmse", 0.0);
    r.training.holdout.sd = t.value("holdout_sd", 0.0);
  }
  return r;
}

void save_regressor(const Regressor& r, const std::filesystem::path& path,
                    const nlohmann::json& provenance) {
  nlohmann::json j = regressor_to_json(r);
  for (auto it = provenance.begin(); it != provenance.end(); ++it)
    if (!j.contains(it.key())) j[it.key()] = it.value();
  write_text(path, j.dump() + "\n");
}

Regressor load_regressor(const std::filesystem::path& path) {
  return regressor_from_json(read_json(path));
}

}  // namespace baseplace
