#include "semsteg/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "semsteg/checkpoint.hpp"
#include "semsteg/dataset.hpp"
#include "semsteg/metrics.hpp"
#include "semsteg/pnm.hpp"

namespace fs = std::filesystem;

namespace semsteg {

namespace {

double now_seconds() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

std::uint64_t checksum(const std::vector<Tensor>& images) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the raw doubles
    for (const auto& img : images) {
        for (double v : img.data) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, 8);
            for (int i = 0; i < 8; ++i) {
                h ^= (bits >> (8 * i)) & 0xff;
                h *= 1099511628211ull;
            }
        }
    }
    return h;
}

std::vector<Tensor> load_dataset_impl(const ExperimentConfig& cfg) {
    if (cfg.dataset.source == "synthetic")
        return synth_dataset(cfg.dataset.seed, 2 * cfg.dataset.size, cfg.codec.image_shape());
    std::vector<Tensor> out;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(cfg.dataset.dir)) {
        auto ext = e.path().extension().string();
        if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        Tensor img = load_pnm(f.string());
        if (img.shape != cfg.codec.image_shape())
            throw ConfigError("dataset image " + f.string() + " has shape " + shape_str(img.shape) +
                              ", config wants " + shape_str(cfg.codec.image_shape()));
        out.push_back(std::move(img));
        if (static_cast<int>(out.size()) >= 2 * cfg.dataset.size) break;
    }
    if (out.empty()) throw ConfigError("no NetPBM images found in " + cfg.dataset.dir);
    return out;
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const DivergedError& e) {
        throw DivergedError(std::string("[stage ") + name + "] " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("[stage ") + name + "] " + e.what());
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(std::string("[stage ") + name + "] " + e.what());
    }
}

std::string img_ext(int channels) { return channels == 1 ? ".pgm" : ".ppm"; }

void evaluate(const ExperimentConfig& cfg, CodecModel& codec, StegoModel& stego,
              std::uint64_t seed, SeedMetrics& m, const std::string& samples_dir);

}  // namespace

// Held-out evaluation: legit metrics, eavesdropper metrics, fresh
// steganalyzer, power audit. Also writes sample reconstructions.
std::vector<Tensor> load_dataset(const ExperimentConfig& cfg) { return load_dataset_impl(cfg); }

SeedMetrics evaluate_models(const ExperimentConfig& cfg, CodecModel& codec, StegoModel& stego,
                            std::uint64_t seed, const std::string& samples_dir) {
    SeedMetrics m;
    m.seed = seed;
    evaluate(cfg, codec, stego, seed, m, samples_dir);
    return m;
}

namespace {

void evaluate(const ExperimentConfig& cfg, CodecModel& codec, StegoModel& stego,
              std::uint64_t seed, SeedMetrics& m, const std::string& samples_dir) {
    auto test_pairs = synth_pairs(cfg.dataset.seed + 1000000, 64, cfg.codec.image_shape());
    Rng eval_rng(seed ^ 0xe4a1ba5e0f00dull);
    Rng ch_rng = eval_rng.derive(0);
    Rng aux_rng = eval_rng.derive(1);
    ChannelStats stats;
    AttackerKnowledge glass = AttackerKnowledge::glass_box(codec);

    double cpsnr = 0, cssim = 0, spsnr = 0, sssim = 0, ecp = 0, esp = 0;
    int idx = 0;
    for (auto& [cover, secret_raw] : test_pairs) {
        Tensor secret = cfg.stego.dwt_preprocess ? highfreq_preprocess(secret_raw).image : secret_raw;
        Tensor cover_feat = codec.encode(cover);
        Tensor secret_feat = codec.encode(secret);
        Tensor tx = stego.embed(cover_feat, secret_feat);
        auto [legit_rx, eve_rx] = tap(tx, cfg.channel, ch_rng, &stats);
        auto [cov_f, sec_f] = stego.extract_features(legit_rx, aux_rng);
        Tensor cover_rec = codec.decode(cov_f);
        Tensor secret_rec = codec.decode(sec_f);
        Tensor eve_img = naive_decode(eve_rx, glass);

        cpsnr += psnr(cover_rec, cover);
        cssim += ssim(cover_rec, cover);
        spsnr += psnr(secret_rec, secret);
        sssim += ssim(secret_rec, secret);
        ecp += psnr(eve_img, cover);
        esp += psnr(eve_img, secret);

        if (idx < 4 && !samples_dir.empty()) {
            std::string base = samples_dir + "/seed" + std::to_string(seed) + "_pair" +
                               std::to_string(idx) + "_";
            std::string ext = img_ext(cfg.codec.C);
            save_pnm(cover, base + "cover" + ext);
            save_pnm(secret, base + "secret" + ext);
            save_pnm(cover_rec, base + "cover_rec" + ext);
            save_pnm(secret_rec, base + "secret_rec" + ext);
            save_pnm(eve_img, base + "eve" + ext);
        }
        ++idx;
    }
    double n = static_cast<double>(test_pairs.size());
    m.cover_psnr = cpsnr / n;
    m.cover_ssim = cssim / n;
    m.secret_psnr = spsnr / n;
    m.secret_ssim = sssim / n;
    m.eve_cover_psnr = ecp / n;
    m.eve_secret_psnr = esp / n;

    // codec-only regression value (noiseless round trip)
    double noiseless = 0;
    for (auto& [cover, secret] : test_pairs) noiseless += psnr(codec.decode(codec.encode(cover)), cover);
    m.codec_noiseless_psnr = noiseless / n;

    // fresh steganalyzer over received features
    int ns = cfg.adversary.steganalyzer_size;
    auto steg_pairs = synth_pairs(cfg.dataset.seed + 2000000, 2 * ns, cfg.codec.image_shape());
    Rng steg_ch_rng = eval_rng.derive(2);
    std::vector<Tensor> cover_cls, stego_cls;
    for (int i = 0; i < ns; ++i) {
        Tensor feat = codec.encode(steg_pairs[static_cast<std::size_t>(i)].first);
        cover_cls.push_back(cfg.adversary.observe_pre_channel
                                ? feat
                                : tap(feat, cfg.channel, steg_ch_rng, &stats).first);
    }
    for (int i = ns; i < 2 * ns; ++i) {
        auto& [cv, sc_raw] = steg_pairs[static_cast<std::size_t>(i)];
        Tensor sc = cfg.stego.dwt_preprocess ? highfreq_preprocess(sc_raw).image : sc_raw;
        Tensor tx = stego.embed(codec.encode(cv), codec.encode(sc));
        stego_cls.push_back(cfg.adversary.observe_pre_channel
                                ? tx
                                : tap(tx, cfg.channel, steg_ch_rng, &stats).first);
    }
    Rng steg_rng = eval_rng.derive(3);
    SteganalyzerConfig scfg;
    scfg.epochs = cfg.adversary.steganalyzer_epochs;
    auto steg_res = train_steganalyzer(cover_cls, stego_cls, steg_rng, scfg);
    m.steganalyzer_auc = steg_res.test_auc;

    m.deep_fades = stats.deep_fades;
    m.max_power_dev = stats.max_power_dev;
}

SeedMetrics run_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                     const std::vector<Tensor>& images, const CodecModel* shared_codec,
                     const std::string& samples_dir) {
    SeedMetrics m;
    m.seed = seed;
    m.dataset_checksum = checksum(images);

    std::vector<Tensor> train_images(images.begin(), images.begin() + images.size() / 2);
    std::vector<std::pair<Tensor, Tensor>> pairs;
    for (std::size_t i = 0; i + images.size() / 2 < images.size(); ++i)
        pairs.push_back({images[i], images[i + images.size() / 2]});

    CodecModel codec;
    if (shared_codec) {
        codec = *shared_codec;
        m.codec_epochs = cfg.codec.epochs;
    } else {
        Rng codec_rng(seed);
        TrainResult tr;
        double t0 = now_seconds();
        codec = stage("train-codec", [&] {
            return make_trained_codec(cfg.codec, train_images, codec_rng, &tr);
        });
        m.codec_train_seconds = now_seconds() - t0;
        m.codec_epochs = cfg.codec.epochs;
        m.codec_steps = tr.steps;
    }
    m.params_codec = param_count(codec.parameters());

    Rng stego_rng(seed ^ 0x57e60ca11ull);
    StegoTrainResult str;
    double t1 = now_seconds();
    StegoModel stego = stage("train-stego", [&] {
        return train_stego(cfg.stego, codec, pairs, cfg.channel, stego_rng, &str);
    });
    m.stego_train_seconds = now_seconds() - t1;
    m.stego_epochs = cfg.stego.epochs;
    m.stego_steps = str.steps;
    m.cost_proxy = str.cost_proxy;
    m.params_generator = param_count(stego.generator_parameters());
    m.params_discriminators = param_count(stego.discriminator_parameters());
    m.params_stego = m.params_generator + m.params_discriminators;
    m.secret_rate_ratio = 0.5;  // c secret channels hidden in c transmitted channels of 2c state

    stage("evaluate", [&] {
        evaluate(cfg, codec, stego, seed, m, samples_dir);
        return 0;
    });
    return m;
}

double median_of(std::vector<double> v) { return median(std::move(v)); }

SeedMetrics aggregate_metrics(const std::vector<SeedMetrics>& per_seed) {
    SeedMetrics a;
    auto collect = [&](auto field) {
        std::vector<double> v;
        for (const auto& m : per_seed) v.push_back(static_cast<double>(m.*field));
        return median_of(v);
    };
    a.cover_psnr = collect(&SeedMetrics::cover_psnr);
    a.cover_ssim = collect(&SeedMetrics::cover_ssim);
    a.secret_psnr = collect(&SeedMetrics::secret_psnr);
    a.secret_ssim = collect(&SeedMetrics::secret_ssim);
    a.eve_cover_psnr = collect(&SeedMetrics::eve_cover_psnr);
    a.eve_secret_psnr = collect(&SeedMetrics::eve_secret_psnr);
    a.steganalyzer_auc = collect(&SeedMetrics::steganalyzer_auc);
    a.codec_train_seconds = collect(&SeedMetrics::codec_train_seconds);
    a.stego_train_seconds = collect(&SeedMetrics::stego_train_seconds);
    a.codec_noiseless_psnr = collect(&SeedMetrics::codec_noiseless_psnr);
    a.secret_rate_ratio = collect(&SeedMetrics::secret_rate_ratio);
    a.cost_proxy = static_cast<long>(collect(&SeedMetrics::cost_proxy));
    a.max_power_dev = collect(&SeedMetrics::max_power_dev);
    if (!per_seed.empty()) {
        a.params_codec = per_seed[0].params_codec;
        a.params_stego = per_seed[0].params_stego;
        a.params_generator = per_seed[0].params_generator;
        a.params_discriminators = per_seed[0].params_discriminators;
        a.codec_epochs = per_seed[0].codec_epochs;
        a.stego_epochs = per_seed[0].stego_epochs;
        a.codec_steps = per_seed[0].codec_steps;
        a.stego_steps = per_seed[0].stego_steps;
        a.dataset_checksum = per_seed[0].dataset_checksum;
        long fades = 0;
        for (const auto& m : per_seed) fades += m.deep_fades;
        a.deep_fades = fades;
    }
    return a;
}

}  // namespace

double median(std::vector<double> values) {
    if (values.empty()) throw ConfigError("median of empty list");
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

nlohmann::json SeedMetrics::to_json() const {
    return {{"seed", seed},
            {"cover_psnr_db", cover_psnr},
            {"cover_ssim", cover_ssim},
            {"secret_psnr_db", secret_psnr},
            {"secret_ssim", secret_ssim},
            {"eve_cover_psnr_db", eve_cover_psnr},
            {"eve_secret_psnr_db", eve_secret_psnr},
            {"steganalyzer_auc", steganalyzer_auc},
            {"params_codec", params_codec},
            {"params_stego", params_stego},
            {"params_generator", params_generator},
            {"params_discriminators", params_discriminators},
            {"codec_train_seconds", codec_train_seconds},
            {"stego_train_seconds", stego_train_seconds},
            {"codec_epochs", codec_epochs},
            {"stego_epochs", stego_epochs},
            {"codec_steps", codec_steps},
            {"stego_steps", stego_steps},
            {"cost_proxy", cost_proxy},
            {"secret_rate_ratio", secret_rate_ratio},
            {"codec_noiseless_psnr_db", codec_noiseless_psnr},
            {"deep_fades", deep_fades},
            {"max_power_dev", max_power_dev},
            {"dataset_checksum", dataset_checksum}};
}

nlohmann::json MetricsReport::to_json() const {
    nlohmann::json seeds = nlohmann::json::array();
    for (const auto& m : per_seed) seeds.push_back(m.to_json());
    return {{"schema_version", kReportSchemaVersion},
            {"artifact_version", kArtifactVersion},
            {"config", config_echo},
            {"per_seed", seeds},
            {"aggregate", aggregate.to_json()}};
}

MetricsReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.output_dir);
    std::string samples_dir = cfg.output_dir + "/samples";
    fs::create_directories(samples_dir);

    MetricsReport report;
    report.config_echo = cfg.to_json();
    std::vector<Tensor> images = stage("load-dataset", [&] { return load_dataset_impl(cfg); });

    for (std::uint64_t seed : cfg.seeds) {
        try {
            report.per_seed.push_back(run_seed(cfg, seed, images, nullptr, samples_dir));
        } catch (...) {
            // flush what we have before propagating
            if (!report.per_seed.empty()) {
                report.aggregate = aggregate_metrics(report.per_seed);
                std::ofstream out(cfg.output_dir + "/report.partial.json");
                out << report.to_json().dump(2) << "\n";
            }
            throw;
        }
    }
    report.aggregate = aggregate_metrics(report.per_seed);
    std::ofstream out(cfg.output_dir + "/report.json");
    out << report.to_json().dump(2) << "\n";
    return report;
}

nlohmann::json Table2Report::to_json() const {
    nlohmann::json v = nlohmann::json::array();
    for (const auto& r : variants) v.push_back(r.to_json());
    return {{"schema_version", kReportSchemaVersion},
            {"artifact_version", kArtifactVersion},
            {"config", config_echo},
            {"variants", v},
            {"orderings",
             {{"params_cnn_lt_inn_lt_gan", params_ordering},
              {"secret_psnr_inn_highest", secret_psnr_ordering},
              {"steganalyzer_auc_gan_lowest", auc_ordering},
              {"training_cost_cnn_lowest", cost_ordering},
              {"budgets_matched", budgets_matched},
              {"all_pass", all_pass()}}}};
}

std::string Table2Report::to_csv() const {
    char buf[256];
    std::string out =
        "variant,strategy,params_total,cost_proxy,stego_train_seconds,cover_psnr_db,"
        "secret_psnr_db,cover_ssim,secret_ssim,steganalyzer_auc,eve_cover_psnr_db,"
        "eve_secret_psnr_db,eve_psnr_deficit_db,secret_rate_ratio\n";
    for (const auto& r : variants) {
        const auto& a = r.aggregate;
        std::string variant = r.config_echo["stego"]["variant"].get<std::string>();
        std::string strategy = r.config_echo["stego"]["strategy"].get<std::string>();
        std::snprintf(buf, sizeof(buf),
                      "%s,%s,%ld,%ld,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                      variant.c_str(), strategy.c_str(), a.params_stego, a.cost_proxy,
                      a.stego_train_seconds, a.cover_psnr, a.secret_psnr, a.cover_ssim,
                      a.secret_ssim, a.steganalyzer_auc, a.eve_cover_psnr, a.eve_secret_psnr,
                      a.eve_cover_psnr - a.eve_secret_psnr, a.secret_rate_ratio);
        out += buf;
    }
    out += "ordering,params_cnn_lt_inn_lt_gan," + std::string(params_ordering ? "pass" : "fail") + "\n";
    out += "ordering,secret_psnr_inn_highest," + std::string(secret_psnr_ordering ? "pass" : "fail") + "\n";
    out += "ordering,steganalyzer_auc_gan_lowest," + std::string(auc_ordering ? "pass" : "fail") + "\n";
    out += "ordering,training_cost_cnn_lowest," + std::string(cost_ordering ? "pass" : "fail") + "\n";
    return out;
}

Table2Report compare(const ExperimentConfig& base_cfg) {
    base_cfg.validate();
    fs::create_directories(base_cfg.output_dir);

    Table2Report table;
    table.config_echo = base_cfg.to_json();

    const std::vector<Tensor> images = stage("load-dataset", [&] { return load_dataset(base_cfg); });
    std::vector<Tensor> train_images(images.begin(), images.begin() + images.size() / 2);

    // codec trained once per seed, shared by all variants (matched budgets)
    std::vector<CodecModel> codecs;
    for (std::uint64_t seed : base_cfg.seeds) {
        Rng codec_rng(seed);
        codecs.push_back(stage("train-codec", [&] {
            return make_trained_codec(base_cfg.codec, train_images, codec_rng, nullptr);
        }));
    }

    struct VariantPlan {
        StegoVariant variant;
        StegoStrategy strategy;
    };
    const std::vector<VariantPlan> plans = {{StegoVariant::cnn, StegoStrategy::two_stage},
                                            {StegoVariant::gan, StegoStrategy::adversarial},
                                            {StegoVariant::inn, StegoStrategy::two_stage}};

    for (const auto& plan : plans) {
        ExperimentConfig cfg = base_cfg;
        cfg.stego.variant = plan.variant;
        cfg.stego.strategy = plan.strategy;
        cfg.output_dir = base_cfg.output_dir + "/" + to_string(plan.variant);
        fs::create_directories(cfg.output_dir + "/samples");

        MetricsReport rep;
        rep.config_echo = cfg.to_json();
        for (std::size_t si = 0; si < cfg.seeds.size(); ++si)
            rep.per_seed.push_back(run_seed(cfg, cfg.seeds[si], images, &codecs[si],
                                            cfg.output_dir + "/samples"));
        rep.aggregate = aggregate_metrics(rep.per_seed);
        std::ofstream out(cfg.output_dir + "/report.json");
        out << rep.to_json().dump(2) << "\n";
        table.variants.push_back(std::move(rep));
    }

    const auto& cnn = table.variants[0].aggregate;
    const auto& gan = table.variants[1].aggregate;
    const auto& inn = table.variants[2].aggregate;
    table.params_ordering = cnn.params_stego < inn.params_stego && inn.params_stego < gan.params_stego;
    table.secret_psnr_ordering = inn.secret_psnr > cnn.secret_psnr && inn.secret_psnr > gan.secret_psnr;
    table.auc_ordering =
        gan.steganalyzer_auc < cnn.steganalyzer_auc && gan.steganalyzer_auc < inn.steganalyzer_auc;
    table.cost_ordering = cnn.cost_proxy < inn.cost_proxy && cnn.cost_proxy < gan.cost_proxy;
    table.budgets_matched = cnn.dataset_checksum == gan.dataset_checksum &&
                            gan.dataset_checksum == inn.dataset_checksum;

    std::ofstream jout(base_cfg.output_dir + "/table2.json");
    jout << table.to_json().dump(2) << "\n";
    std::ofstream cout_(base_cfg.output_dir + "/table2.csv");
    cout_ << table.to_csv();
    return table;
}

std::string collect_reports(const std::string& dir, const std::string& format) {
    if (format != "json" && format != "csv") throw ConfigError("report format must be json or csv");
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.path().filename() == "report.json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw FormatError("no report.json files under " + dir);

    nlohmann::json all = nlohmann::json::array();
    for (const auto& f : files) {
        std::ifstream in(f);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("bad report " + f.string() + ": " + e.what());
        }
        j["path"] = f.string();
        all.push_back(std::move(j));
    }
    if (format == "json") return all.dump(2) + "\n";

    // CSV: one row per (report, seed entry), numeric fields at 12 significant digits
    std::string out = "path,";
    const auto& first = all[0]["per_seed"][0];
    std::vector<std::string> keys;
    for (const auto& [k, _] : first.items()) keys.push_back(k);
    for (std::size_t i = 0; i < keys.size(); ++i) out += keys[i] + (i + 1 < keys.size() ? "," : "\n");
    char buf[64];
    for (const auto& rep : all) {
        for (const auto& row : rep["per_seed"]) {
            out += rep["path"].get<std::string>() + ",";
            for (std::size_t i = 0; i < keys.size(); ++i) {
                const auto& v = row.at(keys[i]);
                if (v.is_number_float()) {
                    std::snprintf(buf, sizeof(buf), "%.12g", v.get<double>());
                    out += buf;
                } else {
                    out += v.dump();
                }
                out += i + 1 < keys.size() ? "," : "\n";
            }
        }
    }
    return out;
}


void save_model_bundle(const ExperimentConfig& cfg, CodecModel& codec, StegoModel* stego,
                       const std::string& path) {
    std::vector<Parameter*> params = codec.parameters();
    nlohmann::json echo = cfg.to_json();
    echo["has_stego"] = stego != nullptr;
    if (stego) {
        auto sp = stego->parameters();
        params.insert(params.end(), sp.begin(), sp.end());
    }
    save_checkpoint(params, echo, path);
}

ModelBundle load_model_bundle(const std::string& path, const ExperimentConfig* expected) {
    nlohmann::json echo = peek_checkpoint_config(path);
    bool has_stego = echo.value("has_stego", false);
    nlohmann::json cfg_json = echo;
    cfg_json.erase("has_stego");

    ModelBundle bundle;
    bundle.cfg = ExperimentConfig::from_json(cfg_json);
    if (expected) {
        if (bundle.cfg.codec.image_shape() != expected->codec.image_shape() ||
            bundle.cfg.codec.feature_shape() != expected->codec.feature_shape())
            throw ShapeConflictError("checkpoint shapes " +
                                     shape_str(bundle.cfg.codec.feature_shape()) +
                                     " conflict with config " +
                                     shape_str(expected->codec.feature_shape()));
    }
    Rng scratch(0);
    bundle.codec = CodecModel(bundle.cfg.codec, scratch);
    std::vector<Parameter*> params = bundle.codec.parameters();
    if (has_stego) {
        bundle.stego = StegoModel(bundle.cfg.stego, bundle.cfg.codec, scratch);
        bundle.has_stego = true;
        auto sp = bundle.stego.parameters();
        params.insert(params.end(), sp.begin(), sp.end());
    }
    load_checkpoint(params, path);
    return bundle;
}

}  // namespace semsteg
