// kmoco: simulate rigid in-plane motion corruption of multi-coil MRI
// acquisitions and correct it with the timing-aware two-branch cascade.

#include "CLI11.hpp"

#include "kmoco/config.hpp"
#include "kmoco/dataset.hpp"
#include "kmoco/loss.hpp"
#include "kmoco/parallel.hpp"
#include "kmoco/render.hpp"
#include "kmoco/resample.hpp"
#include "kmoco/train.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace kmoco;

namespace {

ScanOrder order_from_spec(const std::string& spec) {
    if (spec == "FS256") return build_scan_order(ScanOrder::Kind::FS256, 256);
    if (spec == "FS260") return build_scan_order(ScanOrder::Kind::FS260, 260);
    if (spec == "US260") return build_scan_order(ScanOrder::Kind::US260, 260);
    if (spec.rfind("file:", 0) == 0) return load_scan_order_file(spec.substr(5));
    if (spec.rfind("FS:", 0) == 0) return make_full_order(std::stoi(spec.substr(3)));
    if (spec.rfind("US:", 0) == 0) {
        // US:<width>[:<dense>:<outer>]; defaults follow the US260 proportions
        std::istringstream in(spec.substr(3));
        std::string part;
        std::vector<int> v;
        while (std::getline(in, part, ':')) v.push_back(std::stoi(part));
        if (v.size() == 1) {
            const int width = v[0];
            const int dense = std::max(1, width * 64 / 260);
            const int outer = std::max(1, width * 69 / 260);
            return make_undersampled_order(width, dense, outer);
        }
        if (v.size() == 3) return make_undersampled_order(v[0], v[1], v[2]);
        throw std::invalid_argument("scan order spec '" + spec + "' is malformed");
    }
    throw std::invalid_argument("unknown scan order '" + spec +
                                "' (use FS256|FS260|US260|FS:<w>|US:<w>[:dense:outer]|file:<path>)");
}

MotionConfig motion_from_config(Config& cfg) {
    MotionConfig m;
    m.max_angle = cfg.get_double("max_angle_deg", 8.0) * 3.14159265358979323846 / 180.0;
    m.max_shift = cfg.get_double("max_shift", 5.0);
    m.second_motion_gap = static_cast<int>(cfg.get_int("second_motion_gap", 64));
    m.t_min = static_cast<int>(cfg.get_int("t_min", 8));
    m.max_motions = static_cast<int>(cfg.get_int("max_motions", 3));
    const std::string variant = cfg.get("motion_variant", "auto");
    if (variant == "auto") {
        m.variant = MotionConfig::Variant::Auto;
    } else if (variant == "early") {
        m.variant = MotionConfig::Variant::EarlyFirstMotion;
    } else if (variant == "late") {
        m.variant = MotionConfig::Variant::LateFirstMotion;
    } else {
        throw std::invalid_argument("motion_variant must be auto|early|late");
    }
    return m;
}

net::NetworkConfig network_from_config(Config& cfg) {
    net::NetworkConfig nc; // desk-scale defaults
    nc.n_units = static_cast<int>(cfg.get_int("units", nc.n_units));
    nc.resnet_filters = static_cast<int>(cfg.get_int("resnet_filters", nc.resnet_filters));
    nc.resnet_layers = static_cast<int>(cfg.get_int("resnet_layers", nc.resnet_layers));
    nc.leaky_slope = cfg.get_double("leaky_slope", nc.leaky_slope);
    nc.unet_levels = static_cast<int>(cfg.get_int("unet_levels", nc.unet_levels));
    nc.unet_base_filters =
        static_cast<int>(cfg.get_int("unet_base_filters", nc.unet_base_filters));
    nc.unet_max_filters =
        static_cast<int>(cfg.get_int("unet_max_filters", nc.unet_max_filters));
    nc.kernel_size = static_cast<int>(cfg.get_int("kernel_size", nc.kernel_size));
    return nc;
}

void split_counts(const std::string& split, int count, int& n_train, int& n_val, int& n_test) {
    double a = 0, b = 0, c = 0;
    char s1 = 0, s2 = 0;
    std::istringstream in(split);
    if (!(in >> a >> s1 >> b >> s2 >> c) || s1 != '/' || s2 != '/')
        throw std::invalid_argument("split must look like 0.8/0.1/0.1");
    const double total = a + b + c;
    if (total <= 0) throw std::invalid_argument("split fractions must be positive");
    n_train = static_cast<int>(std::llround(count * a / total));
    n_val = static_cast<int>(std::llround(count * b / total));
    n_test = count - n_train - n_val;
    if (n_train <= 0 || n_val < 0 || n_test < 0)
        throw std::invalid_argument("split leaves an empty training set");
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, int count) {
    std::vector<std::uint64_t> seeds(count);
    for (int i = 0; i < count; ++i) seeds[i] = base + static_cast<std::uint64_t>(i);
    return seeds;
}

int cmd_gen_dataset(const std::string& config_path, const std::string& out_prefix,
                    std::uint64_t seed_override, bool seed_given, int threads) {
    Config cfg = Config::from_file(config_path);
    const int count = static_cast<int>(cfg.get_int("count", 20));
    const std::string split = cfg.get("split", "0.8/0.1/0.1");
    const ScanOrder order = order_from_spec(cfg.get("scan_order", "FS256"));
    GenConfig gen;
    gen.height = static_cast<int>(cfg.get_int("height", 64));
    gen.n_coils = static_cast<int>(cfg.get_int("coils", 4));
    gen.coil_radius = cfg.get_double("coil_radius", 0.0);
    gen.dp_band = static_cast<int>(cfg.get_int("dp_band", 0));
    gen.motion = motion_from_config(cfg);
    std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
    cfg.reject_unknown();
    if (seed_given) seed = seed_override;

    int n_train = 0, n_val = 0, n_test = 0;
    split_counts(split, count, n_train, n_val, n_test);

    struct Part {
        const char* name;
        int count;
        std::uint64_t base;
    };
    const Part parts[3] = {{"train", n_train, seed},
                           {"val", n_val, seed + static_cast<std::uint64_t>(n_train)},
                           {"test", n_test,
                            seed + static_cast<std::uint64_t>(n_train) +
                                static_cast<std::uint64_t>(n_val)}};
    for (const Part& p : parts) {
        if (p.count == 0) continue;
        const Dataset ds = generate_dataset(seed_range(p.base, p.count), order, gen, threads);
        const std::string path = out_prefix + "." + p.name + ".mksp";
        save_dataset_file(ds, path);
        std::cout << p.name << ": " << p.count << " samples -> " << path << "\n";
    }
    return 0;
}

void write_log_csv(const std::string& path, const std::vector<EpochLog>& log) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "epoch,train_loss,val_loss\n";
    f.precision(10);
    for (const EpochLog& row : log)
        f << row.epoch << "," << row.train_loss << "," << row.val_loss << "\n";
}

int cmd_train(const std::string& train_path, const std::string& val_path,
              const std::string& config_path, const std::string& out_path,
              const std::string& log_path, const std::string& variant, double lr_flag,
              int epochs_flag, std::uint64_t seed_override, bool seed_given, int threads) {
    Config cfg = config_path.empty() ? Config() : Config::from_file(config_path);
    ModelSpec model;
    model.config = network_from_config(cfg);
    model.variant = net::variant_from_name(variant);

    OptimConfig opt;
    opt.lr = cfg.get_double("lr", opt.lr);
    opt.epochs = static_cast<int>(cfg.get_int("epochs", opt.epochs));
    opt.batch_size = static_cast<int>(cfg.get_int("batch", opt.batch_size));
    opt.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
    cfg.reject_unknown();
    if (lr_flag >= 0.0) opt.lr = lr_flag;
    if (epochs_flag >= 0) opt.epochs = epochs_flag;
    if (seed_given) opt.seed = seed_override;
    opt.threads = threads;

    const Dataset train_set = load_dataset_file(train_path);
    Dataset val_set;
    if (!val_path.empty()) val_set = load_dataset_file(val_path);

    std::vector<EpochLog> log;
    const net::Weights w = train(train_set, val_set, model, opt, &log);
    net::save_weights_file(w, out_path);
    write_log_csv(log_path.empty() ? out_path + ".log.csv" : log_path, log);
    std::cout << "trained " << net::variant_name(w.variant) << " ("
              << w.parameter_count() << " parameters, " << opt.epochs << " epochs) -> "
              << out_path << "\n";
    return 0;
}

int cmd_correct(const std::string& weights_path, const std::string& dataset_path,
                const std::string& out_dir, int threads) {
    const net::Weights w = net::load_weights_file(weights_path);
    const Dataset ds = load_dataset_file(dataset_path);
    fs::create_directories(out_dir);

    std::vector<std::string> notes(ds.samples.size());
    parallel_for(static_cast<int>(ds.samples.size()), threads, [&](int i) {
        const PreparedSample ps = prepare_sample(ds.samples[i], ds.maps);
        const ComplexImage corrected =
            w.variant == net::Variant::SingleBranch
                ? net::single_branch_forward(ps.x0_dp, ps.mask, ps.k_dp, ds.maps, w)
                : net::cascade_forward(ps.x0_dp, ps.x0_rp, ps.mask, ps.k_dp, ds.maps, w);
        std::ostringstream stem;
        stem << out_dir << "/sample_" << std::setfill('0') << std::setw(4) << i;
        write_raster_png(render_triptych(ps.x0_dp, corrected, ds.samples[i].y_dp),
                         stem.str() + ".png");
        save_image_file(corrected, stem.str() + ".mkim");
        std::ostringstream note;
        note.precision(6);
        note << "sample " << i << ": nmse " << nmse(corrected, ds.samples[i].y_dp);
        notes[i] = note.str();
    });
    for (const std::string& n : notes) std::cout << n << "\n";
    return 0;
}

void write_samples_csv(std::ofstream& f, const std::vector<SampleMetrics>& rows) {
    f.precision(10);
    for (const SampleMetrics& r : rows)
        f << r.sample_id << "," << eval_variant_name(r.variant) << "," << r.nmse << ","
          << r.ssim << "\n";
}

int cmd_evaluate(const std::vector<std::string>& dataset_paths, const std::string& tb_path,
                 const std::string& sb_path, const std::string& out_prefix, int threads) {
    if (dataset_paths.empty()) throw std::invalid_argument("evaluate: no datasets given");

    net::Weights tb, sb;
    bool have_tb = false, have_sb = false;
    if (!tb_path.empty()) {
        tb = net::load_weights_file(tb_path);
        if (tb.variant != net::Variant::TwoBranch)
            throw std::invalid_argument("--two-branch weights file is a " +
                                        net::variant_name(tb.variant) + " model");
        have_tb = true;
    }
    if (!sb_path.empty()) {
        sb = net::load_weights_file(sb_path);
        if (sb.variant != net::Variant::SingleBranch)
            throw std::invalid_argument("--single-branch weights file is a " +
                                        net::variant_name(sb.variant) + " model");
        have_sb = true;
    }

    std::ofstream samples_csv(out_prefix + ".samples.csv", std::ios::binary);
    std::ofstream summary_csv(out_prefix + ".summary.csv", std::ios::binary);
    if (!samples_csv || !summary_csv)
        throw std::runtime_error("cannot write CSV outputs at prefix " + out_prefix);
    samples_csv << "sample_id,variant,nmse,ssim\n";
    summary_csv << "variant,scan_order,n,mean_nmse,mean_nmse_mag,mean_ssim\n";
    summary_csv.precision(10);

    for (const std::string& path : dataset_paths) {
        const Dataset ds = load_dataset_file(path);
        const std::string order_name = ScanOrder::kind_name(ds.order.kind());
        std::vector<std::pair<EvalVariant, const net::Weights*>> variants = {
            {EvalVariant::ZeroFilled, nullptr}};
        if (have_sb) variants.push_back({EvalVariant::SingleBranch, &sb});
        if (have_tb) variants.push_back({EvalVariant::TwoBranch, &tb});
        for (const auto& [variant, weights] : variants) {
            const std::vector<SampleMetrics> rows = evaluate(ds, variant, weights, threads);
            write_samples_csv(samples_csv, rows);
            const MetricsSummary s = summarize(rows, variant, order_name);
            summary_csv << eval_variant_name(s.variant) << "," << s.scan_order << "," << s.n
                        << "," << s.mean_nmse << "," << s.mean_nmse_mag << "," << s.mean_ssim
                        << "\n";
            std::cout << eval_variant_name(variant) << " on " << order_name << ": mean nmse "
                      << s.mean_nmse << ", mean ssim " << s.mean_ssim << "\n";
        }
    }
    return 0;
}

int cmd_render_scan_order(const std::string& spec, const std::string& out_png) {
    const ScanOrder order = order_from_spec(spec);
    write_raster_png(render_scan_order(order), out_png);
    std::cout << "rendered " << order.length() << " acquisitions -> " << out_png << "\n";
    return 0;
}

int cmd_simulate(std::uint64_t phantom_seed, const std::string& order_spec,
                 const std::string& trace_path, int height, int coils, double coil_radius,
                 int dp_band, const std::string& out_path, const std::string& png_path) {
    const ScanOrder order = order_from_spec(order_spec);
    const MotionTrace trace = load_trace_file(trace_path);
    validate_trace(trace, order);

    Dataset ds;
    ds.order = order;
    ds.height = height;
    const double radius =
        coil_radius > 0.0 ? coil_radius : 0.55 * std::min(height, order.n_columns());
    ds.maps = biot_savart_maps(height, order.n_columns(), coils, radius);

    const Phantom ph = synth_phantom(phantom_seed, height, order.n_columns());
    TrainSample s;
    s.seed = phantom_seed;
    s.trace = trace;
    s.k_cor = simulate_corrupted(ph.image, ds.maps, order, trace);
    GenConfig band_cfg;
    band_cfg.dp_band = dp_band;
    const DpSelection sel = select_dp(order, trace, effective_dp_band(band_cfg, order.n_columns()));
    s.mask = sel.mask;
    const ComplexImage x_dp =
        sel.pose_index == 0 ? ph.image
                            : resample_rigid(ph.image, trace.transforms[sel.pose_index - 1]);
    s.y_dp = coil_combine(coil_project(x_dp, ds.maps, make_full_order(order.n_columns())), ds.maps);
    ds.samples.push_back(std::move(s));
    save_dataset_file(ds, out_path);

    if (!png_path.empty()) {
        const PreparedSample ps = prepare_sample(ds.samples[0], ds.maps);
        write_raster_png(render_triptych(zero_filled_recon(ds.samples[0].k_cor, ds.maps),
                                         ps.x0_dp, ds.samples[0].y_dp),
                         png_path);
    }
    std::cout << "simulated 1 sample (DP pose " << sel.pose_index << ", "
              << sel.mask.count() << " DP columns) -> " << out_path << "\n";
    return 0;
}

int cmd_info(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    char magic[5] = {0};
    f.read(magic, 5);
    const std::string tag(magic, magic + (f.gcount() > 0 ? f.gcount() : 0));
    f.close();

    if (tag == "MKSP1") {
        const Dataset ds = load_dataset_file(path);
        std::cout << "dataset (MKSP1): " << ds.samples.size() << " samples, "
                  << ScanOrder::kind_name(ds.order.kind()) << " order, " << ds.height << "x"
                  << ds.width() << ", " << ds.maps.n_coils() << " coils\n";
        for (std::size_t i = 0; i < ds.samples.size() && i < 5; ++i) {
            const TrainSample& s = ds.samples[i];
            std::cout << "  sample " << i << ": seed " << s.seed << ", motions at";
            for (int t : s.trace.timings) std::cout << " " << t;
            std::cout << ", DP columns " << s.mask.count() << "\n";
        }
        return 0;
    }
    if (tag == "MKWT1") {
        const net::Weights w = net::load_weights_file(path);
        std::cout << "weights (MKWT1): " << net::variant_name(w.variant) << ", "
                  << w.parameter_count() << " parameters, " << w.entries.size()
                  << " tensors, units=" << w.config.n_units
                  << " resnet_filters=" << w.config.resnet_filters
                  << " unet_levels=" << w.config.unet_levels
                  << " unet_base=" << w.config.unet_base_filters << "\n";
        return 0;
    }
    if (tag == "MKIM1") {
        const ComplexImage img = load_image_file(path);
        std::cout << "image (MKIM1): " << img.height() << "x" << img.width() << ", max |.| "
                  << img.max_abs() << "\n";
        return 0;
    }
    if (tag.rfind("scano", 0) == 0) {
        const ScanOrder order = load_scan_order_file(path);
        std::cout << "scan order: kind " << ScanOrder::kind_name(order.kind()) << ", width "
                  << order.n_columns() << ", " << order.length()
                  << " acquisitions, t_center " << order.t_center() << "\n";
        return 0;
    }
    if (tag.rfind("trace", 0) == 0) {
        const MotionTrace trace = load_trace_file(path);
        std::cout << "motion trace: " << trace.timings.size() << " motions at";
        for (int t : trace.timings) std::cout << " " << t;
        std::cout << "\n";
        return 0;
    }
    throw std::runtime_error("unrecognized file format in " + path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"k-space motion simulation and timing-aware correction"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    int threads = hardware_threads();
    std::string config_path;
    bool seed_given = false;
    app.add_option("--seed", seed, "override the configured seed")
        ->each([&](const std::string&) { seed_given = true; });
    app.add_option("--threads", threads, "worker threads (default: hardware)");
    app.add_option("--config", config_path, "configuration file (key=value lines)");

    // gen-dataset
    auto* gen = app.add_subcommand("gen-dataset", "generate train/val/test containers");
    std::string gen_out;
    gen->add_option("--out", gen_out, "output path prefix")->required();

    // train
    auto* tr = app.add_subcommand("train", "train a correction model");
    std::string tr_train, tr_val, tr_out, tr_log, tr_variant = "two_branch";
    double tr_lr = -1.0;
    int tr_epochs = -1;
    tr->add_option("--train", tr_train, "training dataset (MKSP1)")->required();
    tr->add_option("--val", tr_val, "validation dataset (MKSP1)");
    tr->add_option("--out", tr_out, "output weights file")->required();
    tr->add_option("--log", tr_log, "training log CSV (default <out>.log.csv)");
    tr->add_option("--variant", tr_variant, "two_branch|single_branch (aliases: two-branch, single-branch)");
    tr->add_option("--lr", tr_lr, "learning rate override");
    tr->add_option("--epochs", tr_epochs, "epoch count override");

    // correct
    auto* co = app.add_subcommand("correct", "run correction and render triptychs");
    std::string co_weights, co_dataset, co_out;
    co->add_option("--weights", co_weights, "weights file")->required();
    co->add_option("--dataset", co_dataset, "dataset (MKSP1)")->required();
    co->add_option("--out", co_out, "output directory")->required();

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "metric tables against DP targets");
    std::vector<std::string> ev_datasets;
    std::string ev_tb, ev_sb, ev_out;
    ev->add_option("--dataset", ev_datasets, "dataset(s) to evaluate")->required();
    ev->add_option("--two-branch", ev_tb, "two-branch weights file");
    ev->add_option("--single-branch", ev_sb, "single-branch weights file");
    ev->add_option("--out", ev_out, "output CSV prefix")->required();

    // render-scan-order
    auto* rs = app.add_subcommand("render-scan-order", "scatter plot of a scan order");
    std::string rs_order, rs_out;
    rs->add_option("--order", rs_order, "FS256|FS260|US260|FS:<w>|US:<w>|file:<path>")
        ->required();
    rs->add_option("--out", rs_out, "output PNG")->required();

    // simulate
    auto* si = app.add_subcommand("simulate", "corrupt one phantom with a trace file");
    std::string si_order = "FS256", si_trace, si_out, si_png;
    int si_height = 0, si_coils = 4, si_band = 0;
    double si_radius = 0.0;
    std::uint64_t si_phantom_seed = 1;
    si->add_option("--order", si_order, "scan order spec");
    si->add_option("--trace", si_trace, "motion trace file")->required();
    si->add_option("--out", si_out, "output dataset (1 sample)")->required();
    si->add_option("--png", si_png, "optional preview triptych PNG");
    si->add_option("--phantom-seed", si_phantom_seed, "phantom seed");
    si->add_option("--height", si_height, "image height (default: order width)");
    si->add_option("--coils", si_coils, "coil count");
    si->add_option("--coil-radius", si_radius, "coil circle radius in pixels");
    si->add_option("--dp-band", si_band, "central band for DP scoring");

    // info
    auto* in = app.add_subcommand("info", "describe a kmoco file");
    std::string in_file;
    in->add_option("file", in_file, "path to inspect")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            if (config_path.empty())
                throw std::invalid_argument("gen-dataset requires --config");
            return cmd_gen_dataset(config_path, gen_out, seed, seed_given, threads);
        }
        if (tr->parsed()) {
            std::string v = tr_variant;
            if (v == "two-branch") v = "two_branch";
            if (v == "single-branch") v = "single_branch";
            return cmd_train(tr_train, tr_val, config_path, tr_out, tr_log, v, tr_lr,
                             tr_epochs, seed, seed_given, threads);
        }
        if (co->parsed()) return cmd_correct(co_weights, co_dataset, co_out, threads);
        if (ev->parsed()) return cmd_evaluate(ev_datasets, ev_tb, ev_sb, ev_out, threads);
        if (rs->parsed()) return cmd_render_scan_order(rs_order, rs_out);
        if (si->parsed()) {
            const int height = si_height > 0 ? si_height : order_from_spec(si_order).n_columns();
            return cmd_simulate(si_phantom_seed, si_order, si_trace, height, si_coils,
                                si_radius, si_band, si_out, si_png);
        }
        if (in->parsed()) return cmd_info(in_file);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
