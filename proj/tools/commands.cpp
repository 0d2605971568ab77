#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "lucid/actmax.hpp"
#include "lucid/amfm.hpp"
#include "lucid/error.hpp"
#include "lucid/gabor.hpp"
#include "lucid/image.hpp"
#include "lucid/posthoc.hpp"
#include "lucid/synth.hpp"
#include "lucid/tinynet.hpp"

namespace lucid::cli {
namespace {

using nlohmann::json;
constexpr double kPi = std::numbers::pi;

std::vector<double> as_vector(const VectorXd& v) { return {v.begin(), v.end()}; }

VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ImageGrid load_input(const json& cfg, const std::string& command) {
  const auto path = cfg.at("input").get<std::string>();
  if (path.empty()) throw std::invalid_argument(command + ": an input raster is required (--input)");
  return load_raster(path);
}

FilterBank bank_from_config(const json& cfg) {
  return design_bank(cfg.at("scales").get<int>(), cfg.at("orientations").get<int>(),
                     cfg.at("lowpass_cutoff").get<double>());
}

unsigned threads_from_config(const json& cfg) {
  const int t = cfg.at("threads").get<int>();
  if (t < 0) throw std::invalid_argument("threads must be >= 0");
  return static_cast<unsigned>(t);
}

json bank_defaults() {
  return {{"scales", kDefaultScales}, {"orientations", kDefaultOrientations}, {"lowpass_cutoff", kDefaultLowpassCutoff}};
}

DenseNet load_net(const std::string& path, const char* what) {
  if (path.empty()) throw std::invalid_argument(std::string("a ") + what + " file is required");
  return net_from_json(read_json(path));
}

std::string scale_tag(int s) { return "scale" + std::to_string(s) + "_"; }

// ---------------------------------------------------------------------------

json run_decompose(const json& cfg, RunContext& ctx) {
  const ImageGrid image = load_input(cfg, "decompose");
  const FilterBank bank = bank_from_config(cfg);
  const Decomposition dec = decompose(image, bank, {threads_from_config(cfg)});

  ctx.write_json("bank.json", to_json(bank));
  LayerWriter& out = ctx.layers();
  json scales = json::array();
  for (int s = 0; s < bank.scales; ++s) {
    const DominantMap dom = dominant_analysis(dec, s);
    const std::string tag = scale_tag(s);
    out.add_normalized(tag + "dominant_amplitude", dom.dominant.amplitude);
    out.add_fixed(tag + "dominant_phase", dom.dominant.phase, {-kPi, kPi});
    out.add_fixed(tag + "dominant_omega1", dom.dominant.omega1, {-kPi, kPi});
    out.add_fixed(tag + "dominant_omega2", dom.dominant.omega2, {-kPi, kPi});
    const std::span<const AmfmComponent> one(&dom.dominant, 1);
    out.add_normalized(tag + "amfm", reconstruct(one, ReconstructionMode::AmFm));
    out.add_fixed(tag + "fm", reconstruct(one, ReconstructionMode::FmOnly), {-1.0, 1.0});
    scales.push_back({{"scale_id", s}, {"dominant_energy", component_energy(dom.dominant)}});
  }
  std::vector<int> all(bank.channels.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  const ImageGrid full = reconstruct(dec, all, ReconstructionMode::AmFm);
  out.add_fixed("reconstruction_amfm", full, {0.0, 1.0});
  const DominantMap overall = dominant_bandpass(dec);
  out.add_fixed("reconstruction_fm", reconstruct(std::span<const AmfmComponent>(&overall.dominant, 1), ReconstructionMode::FmOnly),
                {-1.0, 1.0});

  const double err = (image - full).square().sum();
  return {{"rows", image.rows()},
          {"cols", image.cols()},
          {"channels", bank.channels.size()},
          {"reconstruction_snr_db", err > 0.0 ? 10.0 * std::log10(image.square().sum() / err) : 999.0},
          {"scales", scales}};
}

json run_dominant_filters(const json& cfg, RunContext& ctx) {
  const ImageGrid image = load_input(cfg, "dominant-filters");
  const FilterBank bank = bank_from_config(cfg);
  const double mean = cfg.at("remove_mean").get<bool>() ? image.mean() : 0.0;
  const ImageGrid centred = image - mean;
  const FilterSelection sel =
      select_dominant_filters(centred, bank, cfg.at("threshold").get<double>(), {threads_from_config(cfg)});

  ctx.write_json("bank.json", to_json(bank));
  ctx.layers().add_normalized("coverage", coverage_map(bank, image.rows(), image.cols(), sel.channels));
  ctx.layers().add_fixed("reconstruction", sel.reconstruction + mean, {0.0, 1.0});
  return {{"channels", sel.channels},
          {"channel_count", sel.channels.size()},
          {"ssim_trace", sel.ssim_trace},
          {"reached", sel.reached},
          {"threshold", sel.threshold},
          {"removed_mean", mean}};
}

json run_coverage(const json& cfg, RunContext& ctx) {
  const FilterBank bank = bank_from_config(cfg);
  const auto rows = cfg.at("rows").get<Index>();
  const auto cols = cfg.at("cols").get<Index>();
  auto ids = cfg.at("channels").get<std::vector<int>>();
  for (int id : ids) {
    if (id < 0 || id >= static_cast<int>(bank.channels.size())) {
      throw std::invalid_argument("coverage: channel id " + std::to_string(id) + " out of range");
    }
  }
  if (ids.empty()) {
    ids.resize(bank.channels.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  }
  const ImageGrid map = coverage_map(bank, rows, cols, ids);
  ctx.write_json("bank.json", to_json(bank));
  ctx.layers().add_normalized("coverage", map);
  return {{"channels", ids}, {"min_gain", map.minCoeff()}, {"max_gain", map.maxCoeff()}};
}

json run_actmax(const json& cfg, RunContext& ctx) {
  const DenseNet net = load_net(cfg.at("model").get<std::string>(), "model");
  const int c = cfg.at("class").get<int>();
  const double lambda = cfg.at("lambda").get<double>();
  AscentOptions opts;
  opts.step = cfg.at("step").get<double>();
  opts.max_iters = cfg.at("max_iters").get<int>();
  opts.tol = cfg.at("tol").get<double>();

  const auto regime = cfg.at("regime").get<std::string>();
  Decoder decoder;
  Eigen::Index init_dim = net.input_dim();
  if (regime == "code") {
    const auto path = cfg.at("decoder").get<std::string>();
    decoder = path == "identity" ? identity_decoder(net.input_dim()) : Decoder{load_net(path, "decoder")};
    init_dim = decoder.net.input_dim();
  } else if (regime != "plain" && regime != "expert") {
    throw std::invalid_argument("actmax: regime must be plain, expert or code");
  }
  auto init_values = cfg.at("init").get<std::vector<double>>();
  const VectorXd init = init_values.empty() ? VectorXd::Zero(init_dim) : to_eigen(init_values);

  PrototypeResult result;
  if (regime == "plain") {
    result = maximize_class(net, c, lambda, init, opts);
  } else if (regime == "expert") {
    const auto path = cfg.at("expert").get<std::string>();
    if (path.empty()) throw std::invalid_argument("actmax: the expert regime needs an expert file");
    result = maximize_with_expert(net, c, rbm_from_json(read_json(path)), cfg.at("alpha").get<double>(), init, opts,
                                  lambda);
  } else {
    result = maximize_in_code_space(net, c, decoder, lambda, init, opts);
  }

  const auto rows = cfg.at("image_rows").get<Index>();
  const auto cols = cfg.at("image_cols").get<Index>();
  if (rows > 0 && cols > 0 && rows * cols == result.x.size()) {
    ImageGrid proto = Eigen::Map<const ImageGrid>(result.x.data(), rows, cols);
    ctx.layers().add_normalized("prototype", proto);
  }
  json out = to_json(result);
  out["probability"] = std::exp(log_probability(net, result.x, c));
  return out;
}

json run_explain(const json& cfg, RunContext& ctx) {
  const auto image_path = cfg.at("image").get<std::string>();
  const int block = cfg.at("block").get<int>();
  VectorXd instance;
  InterpretableMapping mapping;
  ImageGrid image;
  if (!image_path.empty()) {
    image = load_raster(image_path);
    instance = Eigen::Map<const VectorXd>(image.data(), image.size());
    mapping = image_block_mapping(image, block);
  } else {
    instance = to_eigen(cfg.at("instance").get<std::vector<double>>());
    if (instance.size() == 0) throw std::invalid_argument("explain: an instance or an image is required");
    mapping = tabular_mapping(instance);
  }

  BlackBox box;
  const auto kind = cfg.at("blackbox").get<std::string>();
  if (kind == "linear") {
    VectorXd coef = to_eigen(cfg.at("coefficients").get<std::vector<double>>());
    if (coef.size() == 0 && !image_path.empty()) coef = VectorXd::Constant(instance.size(), 1.0 / static_cast<double>(instance.size()));
    if (coef.size() != instance.size()) throw std::invalid_argument("explain: coefficients must match the instance dimension");
    const double b0 = cfg.at("intercept").get<double>();
    box = [coef, b0](const VectorXd& x) { return coef.dot(x) + b0; };
  } else if (kind == "net") {
    const DenseNet net = load_net(cfg.at("model").get<std::string>(), "model");
    if (net.input_dim() != instance.size()) throw std::invalid_argument("explain: model input does not match the instance");
    const int c = cfg.at("class").get<int>();
    box = [net, c](const VectorXd& x) { return std::exp(log_probability(net, x, c)); };
  } else {
    throw std::invalid_argument("explain: blackbox must be linear or net");
  }

  SurrogateOptions opts;
  opts.budget = cfg.at("budget").get<int>();
  opts.samples = cfg.at("samples").get<int>();
  opts.kernel_width = cfg.at("kernel_width").get<double>();
  opts.seed = cfg.at("seed").get<std::uint64_t>();
  const LocalExplanation e = fit_local_surrogate(box, mapping, opts);

  ctx.write_json("explanation.json", to_json(e));
  if (!image_path.empty()) ctx.layers().add_normalized("heatmap", block_heatmap(e, image.rows(), image.cols(), block));
  json out = to_json(e);
  out["d_prime"] = mapping.d_prime;
  return out;
}

DatasetSpec dataset_spec(const json& cfg, const std::string& kind_key, const std::string& seed_key) {
  DatasetSpec s;
  s.kind = dataset_kind_from_string(cfg.at(kind_key).get<std::string>());
  s.points = cfg.at("points").get<int>();
  s.mean0 = cfg.at("mean0").get<std::vector<double>>();
  s.mean1 = cfg.at("mean1").get<std::vector<double>>();
  s.stddev = cfg.at("stddev").get<double>();
  s.min_margin = cfg.at("min_margin").get<double>();
  s.seed = cfg.at(seed_key).get<std::uint64_t>();
  return s;
}

json run_train(const json& cfg, RunContext& ctx) {
  const auto data_path = cfg.at("data").get<std::string>();
  const Dataset data = data_path.empty() ? generate_dataset(dataset_spec(cfg, "dataset", "data_seed"))
                                         : dataset_from_json(read_json(data_path));
  if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
  const auto model = cfg.at("model").get<std::string>();
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  const int epochs = cfg.at("epochs").get<int>();
  const double lr = cfg.at("learning_rate").get<double>();

  if (model == "net") {
    std::vector<int> sizes{static_cast<int>(data.inputs.cols())};
    for (int h : cfg.at("hidden_layers").get<std::vector<int>>()) sizes.push_back(h);
    int classes = 2;
    for (int l : data.labels) classes = std::max(classes, l + 1);
    sizes.push_back(classes);
    TrainConfig tc;
    tc.learning_rate = lr;
    tc.epochs = epochs;
    tc.batch_size = cfg.at("batch_size").get<int>();
    tc.seed = seed;
    const TrainResult trained = train(make_net(sizes, seed), data, tc);
    ctx.write_json("dataset.json", to_json(data));
    ctx.write_json("net.json", to_json(trained.net));
    return {{"layer_sizes", sizes},
            {"accuracy", accuracy(trained.net, data)},
            {"final_loss", mean_loss(trained.net, data)},
            {"loss_trace", trained.loss_trace}};
  }
  if (model == "rbm") {
    const RbmTraining t = train_rbm(data.inputs, cfg.at("hidden_units").get<int>(), epochs, lr, seed);
    ctx.write_json("dataset.json", to_json(data));
    ctx.write_json("rbm.json", to_json(t.expert));
    return {{"hidden_units", t.expert.weights.rows()}, {"reconstruction_error", t.reconstruction_error}};
  }
  throw std::invalid_argument("train: model must be net or rbm");
}

json run_synth(const json& cfg, RunContext& ctx) {
  const auto kind = cfg.at("kind").get<std::string>();
  if (kind == "two_blob" || kind == "xor") {
    const Dataset data = generate_dataset(dataset_spec(cfg, "kind", "seed"));
    ctx.write_json("dataset.json", to_json(data));
    return {{"samples", data.size()}, {"dimension", data.inputs.cols()}};
  }
  ImageSpec spec = image_spec_from_json(cfg);
  if (spec.harmonics.empty() && spec.kind == ImageKind::PureCosine) spec.harmonics = {{0.4, 0.9, 0.3, 0.0}};
  if (spec.harmonics.empty() && spec.kind == ImageKind::HalfSplit) {
    spec.harmonics = {{0.4, 0.9, 0.3, 0.0}, {0.4, -0.2, 0.8, 0.0}};
  }
  const SyntheticImage img = generate_image(spec);
  LayerWriter& out = ctx.layers();
  // Exact samples when they fit the raster range, min/max otherwise.
  if (img.image.minCoeff() >= 0.0 && img.image.maxCoeff() <= 1.0)
    out.add_fixed("image", img.image, {0.0, 1.0});
  else
    out.add_normalized("image", img.image);
  if (cfg.at("truth").get<bool>()) {
    for (std::size_t k = 0; k < img.truth.size(); ++k) {
      const std::string tag = "truth" + std::to_string(k) + "_";
      out.add_normalized(tag + "amplitude", img.truth[k].amplitude);
      out.add_fixed(tag + "omega1", img.truth[k].omega1, {-kPi, kPi});
      out.add_fixed(tag + "omega2", img.truth[k].omega2, {-kPi, kPi});
    }
    if (img.winner.size() > 0) out.add_fixed("winner", img.winner.cast<double>(), {0.0, 1.0});
  }
  const auto clipped = ((img.image < 0.0) || (img.image > 1.0)).count();
  return {{"rows", img.image.rows()}, {"cols", img.image.cols()}, {"clipped_samples", clipped},
          {"spec", to_json(spec)}};
}

json merged(json a, const json& b) {
  a.update(b);
  return a;
}

}  // namespace

RunContext::RunContext(std::filesystem::path dir) : dir_(std::move(dir)), writer_(dir_) {}

void RunContext::ensure_dir() {
  if (created_) return;
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
  created_ = true;
}

LayerWriter& RunContext::layers() {
  ensure_dir();
  return writer_;
}

void RunContext::write_json(const std::string& file, const json& value) {
  ensure_dir();
  lucid::write_json(dir_ / file, value);
  files_.push_back(file);
}

const std::vector<Command>& commands() {
  static const std::vector<Command> list = [] {
    const json dataset = {{"points", 200}, {"mean0", {-3.0, 0.0}}, {"mean1", {3.0, 0.0}}, {"stddev", 1.0}, {"min_margin", 1.0}};
    return std::vector<Command>{
        {"decompose", "AM-FM decomposition with per-scale dominant components",
         merged(bank_defaults(), {{"input", ""}, {"threads", 1}}), run_decompose},
        {"dominant-filters", "greedy SSIM-gated selection of dominant channels",
         merged(bank_defaults(), {{"input", ""}, {"threads", 1}, {"threshold", kSsimAcceptance}, {"remove_mean", true}}),
         run_dominant_filters},
        {"coverage", "frequency-plane coverage of a channel bank",
         merged(bank_defaults(), {{"rows", 256}, {"cols", 256}, {"channels", json::array()}}), run_coverage},
        {"actmax", "class prototype search by activation maximization",
         {{"model", ""}, {"class", 0}, {"regime", "plain"}, {"lambda", 0.1}, {"alpha", 1.0}, {"expert", ""},
          {"decoder", ""}, {"init", json::array()}, {"step", 0.1}, {"max_iters", 10000}, {"tol", 1e-6},
          {"image_rows", 0}, {"image_cols", 0}},
         run_actmax},
        {"explain", "sparse local linear surrogate of a black-box score",
         {{"instance", json::array()}, {"image", ""}, {"block", kDefaultBlockSize}, {"blackbox", "linear"},
          {"coefficients", json::array()}, {"intercept", 0.0}, {"model", ""}, {"class", 0}, {"budget", 0},
          {"samples", 1000}, {"kernel_width", 0.25}, {"seed", 1}},
         run_explain},
        {"train", "train a classifier or a density expert",
         merged(dataset, {{"model", "net"}, {"dataset", "xor"}, {"data", ""}, {"data_seed", 1},
                          {"hidden_layers", {8}}, {"learning_rate", 0.5}, {"epochs", 2000}, {"batch_size", 0},
                          {"seed", 7}, {"hidden_units", 4}}),
         run_train},
        {"synth", "synthetic images and datasets",
         merged(dataset, {{"kind", "pure_cosine"}, {"rows", 256}, {"cols", 256}, {"harmonics", json::array()},
                          {"offset", 0.5}, {"chirp_rate", 0.002}, {"seed", 1}, {"truth", true}}),
         run_synth},
    };
  }();
  return list;
}

json parse_flag_value(const std::string& text, const json& like) {
  try {
    switch (like.type()) {
      case json::value_t::string:
        return text;
      case json::value_t::boolean:
        if (text == "true" || text == "1") return true;
        if (text == "false" || text == "0") return false;
        break;
      case json::value_t::number_integer:
      case json::value_t::number_unsigned: {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used == text.size()) return v;
        break;
      }
      case json::value_t::number_float: {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
        break;
      }
      default:
        return json::parse(text);
    }
  } catch (const std::logic_error&) {
    // stoll/stod/json parse failures fall through to the message below
  }
  throw std::invalid_argument("cannot parse '" + text + "' as " + like.type_name());
}

namespace {

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return !(a.is_number_integer() && b.is_number_float());
  return a.type() == b.type();
}

}  // namespace

json merge_config(const Command& command, const json& file_config,
                  const std::vector<std::pair<std::string, std::string>>& flags) {
  json cfg = command.defaults;
  json source = file_config;
  if (source.is_object() && source.contains("config") && source.at("config").is_object()) {
    if (source.contains("command") && source.at("command") != command.name) {
      throw std::invalid_argument("config file belongs to command " + source.at("command").dump());
    }
    source = source.at("config");
  }
  if (!source.is_null()) {
    if (!source.is_object()) throw std::invalid_argument("config file must hold a JSON object");
    for (const auto& [key, value] : source.items()) {
      if (!cfg.contains(key)) throw std::invalid_argument("unknown config key '" + key + "'");
      if (!same_kind(cfg.at(key), value)) throw std::invalid_argument("config key '" + key + "' has the wrong type");
      cfg[key] = value;
    }
  }
  for (const auto& [key, text] : flags) {
    if (!cfg.contains(key)) throw std::invalid_argument("unknown option '" + key + "'");
    cfg[key] = parse_flag_value(text, command.defaults.at(key));
  }
  return cfg;
}

json execute(const Command& command, const json& config, const std::filesystem::path& out_dir) {
  RunContext ctx(out_dir);
  json results = command.run(config, ctx);
  json report = {{"command", command.name},
                 {"config", config},
                 {"results", std::move(results)},
                 {"layers", ctx.layers().layers_json()},
                 {"files", ctx.files()}};
  lucid::write_json(out_dir / "report.json", report);
  return report;
}

}  // namespace lucid::cli
