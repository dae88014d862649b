#include "driftcomp/models/drift_model.hpp"

#include <fstream>

#include <json.hpp>

namespace driftcomp {

using json = nlohmann::json;

std::string_view family_tag(ModelFamily f) {
  switch (f) {
    case ModelFamily::Lsm: return "lsm";
    case ModelFamily::Mlp: return "mlp";
    case ModelFamily::MlpSeq: return "mlp-seq";
    case ModelFamily::Tcn: return "tcn";
    case ModelFamily::Gru: return "gru";
  }
  return "?";
}

std::string_view family_label(ModelFamily f) {
  switch (f) {
    case ModelFamily::Lsm: return "LSM";
    case ModelFamily::Mlp: return "MLP";
    case ModelFamily::MlpSeq: return "MLP-Seq";
    case ModelFamily::Tcn: return "TCN";
    case ModelFamily::Gru: return "GRU";
  }
  return "?";
}

ModelFamily parse_family(std::string_view tag) {
  for (auto f : kAllFamilies) {
    if (tag == family_tag(f) || tag == family_label(f)) return f;
  }
  fail(ErrorKind::InvalidInput, "unknown model family '" + std::string(tag) +
                                    "' (expected lsm, mlp, mlp-seq, tcn or gru)");
}

std::size_t default_hidden(ModelFamily family) {
  switch (family) {
    case ModelFamily::Mlp:
    case ModelFamily::MlpSeq: return 36;
    case ModelFamily::Tcn: return 16;
    case ModelFamily::Gru: return 32;
    case ModelFamily::Lsm: return 0;
  }
  return 0;
}

void DriftModel::check() const {
  require(window >= 1, ErrorKind::Configuration, "model window must be at least 1");
  for (double s : axis_scale) {
    require(s > 0 && std::isfinite(s), ErrorKind::Configuration, "axis_scale must be positive");
  }
  auto expect = [&](bool ok) {
    require(ok, ErrorKind::Configuration,
            "model family '" + std::string(family_tag(family)) +
                "' does not match its parameter container");
  };
  switch (family) {
    case ModelFamily::Lsm: expect(std::holds_alternative<LsmModel<double>>(net)); break;
    case ModelFamily::Mlp:
    case ModelFamily::MlpSeq: {
      expect(std::holds_alternative<MlpModel<double>>(net));
      const auto& m = std::get<MlpModel<double>>(net);
      const std::size_t want = family == ModelFamily::Mlp ? 1 : window;
      require(m.input_width == want, ErrorKind::Configuration,
              "MLP input width " + std::to_string(m.input_width) + " does not match " +
                  std::string(family_tag(family)) + " with window " + std::to_string(window));
      break;
    }
    case ModelFamily::Tcn: expect(std::holds_alternative<TcnModel<double>>(net)); break;
    case ModelFamily::Gru: expect(std::holds_alternative<GruModel<double>>(net)); break;
  }
  std::visit([](const auto& m) { m.check(); }, net);
}

Block<double> DriftModel::predict_normalized(const Block<double>& windows) const {
  require(windows.rows() == static_cast<Eigen::Index>(window), ErrorKind::Configuration,
          "input window length " + std::to_string(windows.rows()) +
              " does not match model window " + std::to_string(window));
  return std::visit(
      [&](const auto& m) -> Block<double> {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LsmModel<double>>) {
          Block<double> out(static_cast<Eigen::Index>(kAxes), windows.cols());
          for (Eigen::Index c = 0; c < windows.cols(); ++c) {
            const double t = windows(windows.rows() - 1, c) * kTempHalfRangeC + kTempCenterC;
            out.col(c) = lsm_predict_vector(m, t);
          }
          for (std::size_t a = 0; a < kAxes; ++a) out.row(static_cast<Eigen::Index>(a)) /= axis_scale[a];
          return out;
        } else {
          typename M::Workspace ws;
          return m.forward(windows, ws);
        }
      },
      net);
}

Wrench DriftModel::predict(std::span<const double> temps_c) const {
  DriftPredictor p(std::make_shared<const DriftModel>(*this));
  return p.predict(temps_c);
}

std::vector<Wrench> DriftModel::predict(std::span<const TemperatureWindow> windows) const {
  std::vector<Wrench> out;
  out.reserve(windows.size());
  if (windows.empty()) return out;
  if (family == ModelFamily::Lsm) {
    // Physical units directly, without the normalize/denormalize round trip.
    const auto& m = std::get<LsmModel<double>>(net);
    for (const auto& w : windows) {
      require(w.size() == window, ErrorKind::Configuration, "window length mismatch");
      out.push_back(Wrench::from_vector(lsm_predict_vector(m, w.last())));
    }
    return out;
  }
  const Block<double> y = predict_normalized(window_block<double>(windows));
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    Wrench w;
    for (std::size_t a = 0; a < kAxes; ++a) w[a] = y(static_cast<Eigen::Index>(a), c) * axis_scale[a];
    out.push_back(w);
  }
  return out;
}

DriftModel init_model(ModelFamily family, std::uint64_t seed, std::size_t hidden,
                      std::size_t window) {
  require(window >= 1, ErrorKind::InvalidInput, "init_model: window must be at least 1");
  if (hidden == 0) hidden = default_hidden(family);
  DriftModel m;
  m.family = family;
  m.window = window;
  switch (family) {
    case ModelFamily::Lsm: m.net = LsmModel<double>{}; break;
    case ModelFamily::Mlp: m.net = init_mlp<double>(1, hidden, 3, seed); break;
    case ModelFamily::MlpSeq: m.net = init_mlp<double>(window, hidden, 3, seed); break;
    case ModelFamily::Tcn: m.net = init_tcn<double>(hidden, seed); break;
    case ModelFamily::Gru: m.net = init_gru<double>(hidden, seed); break;
  }
  m.check();
  return m;
}

DriftPredictor::DriftPredictor(std::shared_ptr<const DriftModel> model) : model_(std::move(model)) {
  require(model_ != nullptr, ErrorKind::Configuration, "DriftPredictor: no model");
  model_->check();
  input_.resize(static_cast<Eigen::Index>(model_->window), 1);
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (!std::is_same_v<M, LsmModel<double>>) ws_.emplace<typename M::Workspace>();
      },
      model_->net);
}

Wrench DriftPredictor::predict(std::span<const double> temps_c) {
  const auto& dm = *model_;
  if (temps_c.size() != dm.window) {
    fail(ErrorKind::Configuration, "window of " + std::to_string(temps_c.size()) +
                                       " temperatures does not match model window " +
                                       std::to_string(dm.window));
  }
  Wrench out;
  if (const auto* lsm = std::get_if<LsmModel<double>>(&dm.net)) {
    const double t = temps_c.back();
    for (std::size_t a = 0; a < kAxes; ++a) {
      const auto i = static_cast<Eigen::Index>(a);
      out[a] = lsm->o(i) + lsm->c_t(i, 0) * t;
    }
    return out;
  }
  for (std::size_t k = 0; k < temps_c.size(); ++k) {
    input_(static_cast<Eigen::Index>(k), 0) = normalize_temperature<double>(temps_c[k]);
  }
  const Block<double>* y = nullptr;
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (!std::is_same_v<M, LsmModel<double>>) {
          y = &m.forward(input_, std::get<typename M::Workspace>(ws_));
        }
      },
      dm.net);
  for (std::size_t a = 0; a < kAxes; ++a) out[a] = (*y)(static_cast<Eigen::Index>(a), 0) * dm.axis_scale[a];
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr int kModelFormatVersion = 1;

template <typename Derived>
json param_to_json(const std::string& name, const Eigen::MatrixBase<Derived>& p) {
  json data = json::array();
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) data.push_back(p(i, j));
  }
  return {{"name", name}, {"rows", p.rows()}, {"cols", p.cols()}, {"data", std::move(data)}};
}

template <typename M>
json params_to_json(const M& m) {
  json out = json::array();
  M copy = m;
  M::visit([&](const std::string& name, auto& p) { out.push_back(param_to_json(name, p)); }, copy);
  return out;
}

template <typename M>
void params_from_json(M& m, const json& params) {
  std::size_t idx = 0;
  M::visit(
      [&](const std::string& name, auto& p) {
        require(idx < params.size(), ErrorKind::Parse, "model file: missing parameter " + name);
        const auto& jp = params.at(idx++);
        require(jp.at("name").get<std::string>() == name, ErrorKind::Parse,
                "model file: expected parameter " + name + ", found " +
                    jp.at("name").get<std::string>());
        const auto rows = jp.at("rows").get<Eigen::Index>();
        const auto cols = jp.at("cols").get<Eigen::Index>();
        require(rows == p.rows() && cols == p.cols(), ErrorKind::Parse,
                "model file: parameter " + name + " has shape " + std::to_string(rows) + "x" +
                    std::to_string(cols) + ", architecture implies " + std::to_string(p.rows()) +
                    "x" + std::to_string(p.cols()));
        const auto& data = jp.at("data");
        require(data.size() == static_cast<std::size_t>(rows * cols), ErrorKind::Parse,
                "model file: parameter " + name + " has the wrong number of values");
        std::size_t k = 0;
        for (Eigen::Index i = 0; i < rows; ++i) {
          for (Eigen::Index j = 0; j < cols; ++j) p(i, j) = data[k++].get<double>();
        }
        require(all_finite(p), ErrorKind::Parse, "model file: parameter " + name + " not finite");
      },
      m);
  require(idx == params.size(), ErrorKind::Parse, "model file: unexpected extra parameters");
}

json architecture(const DriftModel& dm) {
  return std::visit(
      [&](const auto& m) -> json {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LsmModel<double>>) {
          return {{"regressor", "last_temperature"}};
        } else if constexpr (std::is_same_v<M, MlpModel<double>>) {
          json widths = json::array();
          for (const auto& l : m.layers) widths.push_back(l.w.rows());
          return {{"input_width", m.input_width}, {"layer_widths", widths}, {"activation", "relu"}};
        } else if constexpr (std::is_same_v<M, TcnModel<double>>) {
          json dil = json::array();
          for (const auto& b : m.blocks) dil.push_back(b.conv1.dilation);
          return {{"channels", m.channels()},
                  {"kernel", m.blocks.front().conv1.kernel()},
                  {"dilations", dil},
                  {"receptive_field", m.receptive_field()}};
        } else {
          return {{"hidden", m.hidden()}, {"gate_bias", false}};
        }
      },
      dm.net);
}

}  // namespace

void write_model(const DriftModel& m, std::ostream& out) {
  m.check();
  json doc;
  doc["format"] = "driftcomp-model";
  doc["version"] = kModelFormatVersion;
  doc["family"] = std::string(family_tag(m.family));
  doc["window"] = m.window;
  doc["normalization"] = {{"temp_center_c", kTempCenterC}, {"temp_half_range_c", kTempHalfRangeC}};
  doc["axis_scale"] = m.axis_scale;
  doc["architecture"] = architecture(m);
  doc["params"] = std::visit([](const auto& net) { return params_to_json(net); }, m.net);
  out << doc.dump(1) << '\n';
}

DriftModel read_model(std::istream& in, const std::string& source) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, source + ": " + e.what());
  }
  try {
    require(doc.at("format") == "driftcomp-model", ErrorKind::Parse, "not a driftcomp model file");
    const int version = doc.at("version").get<int>();
    require(version == kModelFormatVersion, ErrorKind::Parse,
            "unsupported model format version " + std::to_string(version));
    const auto& norm = doc.at("normalization");
    require(norm.at("temp_center_c").get<double>() == kTempCenterC &&
                norm.at("temp_half_range_c").get<double>() == kTempHalfRangeC,
            ErrorKind::Parse, "model was trained with different temperature normalization");

    DriftModel m;
    m.family = parse_family(doc.at("family").get<std::string>());
    m.window = doc.at("window").get<std::size_t>();
    m.axis_scale = doc.at("axis_scale").get<std::array<double, kAxes>>();
    const auto& arch = doc.at("architecture");
    const auto& params = doc.at("params");
    switch (m.family) {
      case ModelFamily::Lsm: {
        LsmModel<double> net;
        params_from_json(net, params);
        m.net = std::move(net);
        break;
      }
      case ModelFamily::Mlp:
      case ModelFamily::MlpSeq: {
        const auto widths = arch.at("layer_widths").get<std::vector<std::size_t>>();
        require(widths.size() >= 2, ErrorKind::Parse, "MLP needs at least one hidden layer");
        MlpModel<double> net = init_mlp<double>(arch.at("input_width").get<std::size_t>(),
                                                widths.front(), widths.size() - 1, 0);
        // Re-shape hidden layers in case widths differ from one another.
        Eigen::Index fan_in = static_cast<Eigen::Index>(net.input_width);
        for (std::size_t i = 0; i < widths.size(); ++i) {
          const auto w = static_cast<Eigen::Index>(widths[i]);
          net.layers[i].w.resize(w, fan_in);
          net.layers[i].b.resize(w);
          fan_in = w;
        }
        params_from_json(net, params);
        m.net = std::move(net);
        break;
      }
      case ModelFamily::Tcn: {
        const auto dil = arch.at("dilations").get<std::vector<Eigen::Index>>();
        TcnModel<double> net = init_tcn<double>(arch.at("channels").get<std::size_t>(), 0, dil,
                                                arch.at("kernel").get<Eigen::Index>());
        params_from_json(net, params);
        m.net = std::move(net);
        break;
      }
      case ModelFamily::Gru: {
        GruModel<double> net = init_gru<double>(arch.at("hidden").get<std::size_t>(), 0);
        params_from_json(net, params);
        m.net = std::move(net);
        break;
      }
    }
    m.check();
    return m;
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, source + ": malformed model document: " + e.what());
  } catch (const Error& e) {
    throw Error(e.kind() == ErrorKind::InvalidInput ? ErrorKind::Parse : e.kind(),
                source + ": " + e.what());
  }
}

void save_model(const DriftModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write model file " + path.string());
  write_model(m, out);
  out.flush();
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

DriftModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open model file " + path.string());
  return read_model(in, path.string());
}

}  // namespace driftcomp
