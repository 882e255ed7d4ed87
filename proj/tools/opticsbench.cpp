#include <opticsbench.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace opticsbench;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool verbose = false;
};

// Resolved settings of one run, echoed to stderr before any work starts.
class ConfigEcho {
public:
    explicit ConfigEcho(std::string command) : command_(std::move(command)) {}

    template <typename T>
    ConfigEcho& add(const std::string& key, const T& value) {
        std::ostringstream os;
        os << value;
        items_.emplace_back(key, os.str());
        return *this;
    }

    void print() const {
        std::cerr << "# opticsbench " << command_ << '\n';
        for (const auto& [k, v] : items_) std::cerr << "#   " << k << " = " << v << '\n';
    }

private:
    std::string command_;
    std::vector<std::pair<std::string, std::string>> items_;
};

std::string join(const std::vector<std::string>& v, const char* sep = ",") {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
    return out;
}

template <typename T>
std::string join_num(const T& v) {
    std::vector<std::string> s;
    for (const auto& x : v) s.push_back(format_number(static_cast<double>(x)));
    return join(s);
}

Corruption corruption_arg(const std::string& name) {
    if (auto c = parse_corruption(name)) return *c;
    throw ConfigError("unknown corruption '" + name + "'");
}

// "coma/3/1", "coma/s3/v1" or "defocus_blur/2".
KernelLabel label_arg(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, '/');) parts.push_back(p);
    if (parts.size() < 2 || parts.size() > 3) throw ConfigError("kernel label must look like coma/3/0: " + text);
    auto num = [&](std::string s, char prefix) {
        if (!s.empty() && s.front() == prefix) s.erase(0, 1);
        const auto v = parse_integer(s);
        if (!v) throw ConfigError("bad kernel label: " + text);
        return static_cast<int>(*v);
    };
    return {corruption_arg(parts[0]), num(parts[1], 's'), parts.size() == 3 ? num(parts[2], 'v') : 0};
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + path.string());
    os << text;
    if (!os) throw IoError("write failed: " + path.string());
}

struct MatchOptions {
    int grid = 256;
    int pupil = 128;
    int samples_per_pixel = 5;
    double step = 0.1;
    double half_width = 0.5;
    bool joint = false;
    std::vector<double> wavelengths{610.0, 530.0, 470.0};
    int metric_channel = 1;
    double edge_angle = 5.0;

    void add_to(CLI::App* app) {
        app->add_option("--grid", grid, "PSF grid size in samples")->capture_default_str();
        app->add_option("--pupil", pupil, "pupil diameter in samples at the shortest wavelength")->capture_default_str();
        app->add_option("--samples-per-pixel", samples_per_pixel, "PSF samples binned per kernel pixel")
            ->capture_default_str();
        app->add_option("--step", step, "coefficient step in waves")->capture_default_str();
        app->add_option("--half-width", half_width, "search half width in waves")->capture_default_str();
        app->add_flag("--joint-secondary", joint, "also sweep the partner mode of the pair");
        app->add_option("--wavelengths", wavelengths, "R G B wavelengths in nm")->expected(3)->capture_default_str();
        app->add_option("--metric-channel", metric_channel, "channel for PSF-level metrics (0=R,1=G,2=B)")
            ->capture_default_str();
        app->add_option("--edge-angle", edge_angle, "slanted edge angle in degrees")->capture_default_str();
    }

    MatchConfig config(const Globals& g) const {
        MatchConfig cfg;
        cfg.step = step;
        cfg.search_half_width = half_width;
        cfg.joint_secondary = joint;
        cfg.metric_channel = metric_channel;
        cfg.edge_angle_deg = edge_angle;
        cfg.chart_seed = g.seed;
        cfg.threads = g.threads;
        for (int c = 0; c < kChannels; ++c) cfg.wavelengths_nm[c] = wavelengths.at(c);
        cfg.validate();
        return cfg;
    }

    void echo(ConfigEcho& e) const {
        e.add("grid", grid).add("pupil", pupil).add("samples_per_pixel", samples_per_pixel);
        e.add("step", step).add("half_width", half_width).add("joint_secondary", joint);
        e.add("wavelengths_nm", join_num(wavelengths)).add("metric_channel", metric_channel);
        e.add("edge_angle_deg", edge_angle);
    }
};

void print_report(std::ostream& os, const MatchReport& r) {
    os << r.label.to_string() << "  Z" << r.primary_mode << " = " << format_number(r.primary_coefficient)
       << " waves";
    if (r.secondary_coefficient != 0.0) os << ", Z" << r.secondary_mode << " = " << format_number(r.secondary_coefficient);
    os << "  (guess " << format_number(r.initial_guess) << ", offset " << format_number(r.offset) << ")  composite "
       << format_number(r.composite) << '\n';
    for (const auto& f : r.flags) os << "    note: " << f << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optical-aberration corruption benchmark tools"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "random seed")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads (0: OPTICSBENCH_THREADS or all cores)");
    app.add_flag("-v,--verbose", g.verbose, "print per-item details");

    // generate
    auto* gen = app.add_subcommand("generate", "match all corruption cells against the disk baseline and write a kernel stack");
    std::string gen_out, gen_report, gen_rg;
    bool gen_baseline = false;
    MatchOptions gen_opts;
    gen->add_option("--out", gen_out, "output OKF1 kernel file")->required();
    gen->add_option("--report", gen_report, "match report CSV (default: <out>.report.csv)");
    gen->add_option("--rg-out", gen_rg, "also write the red/green-only variant stack");
    gen->add_flag("--with-baseline", gen_baseline, "include the disk baseline kernels in the stack");
    gen_opts.add_to(gen);

    // match
    auto* match = app.add_subcommand("match", "match one (corruption, severity, variant) cell and print the metric report");
    std::string m_corr = "defocus_spherical", m_report;
    int m_sev = 1, m_var = 0;
    std::optional<double> m_guess;
    MatchOptions m_opts;
    match->add_option("--corruption", m_corr, "astigmatism, coma, defocus_spherical or trefoil")->capture_default_str();
    match->add_option("--severity", m_sev, "1..5")->capture_default_str();
    match->add_option("--variant", m_var, "0 or 1")->capture_default_str();
    match->add_option("--initial-guess", m_guess, "initial coefficient in waves (default: calibrated)");
    match->add_option("--report", m_report, "write the report CSV here");
    m_opts.add_to(match);

    // corrupt
    auto* corrupt = app.add_subcommand("corrupt", "apply a kernel stack to a class-subdirectory image tree");
    std::string c_in, c_out, c_kernels, c_format = "png";
    std::vector<std::string> c_corrs;
    std::vector<int> c_sevs{1, 2, 3, 4, 5};
    bool c_aniso = false;
    corrupt->add_option("--in", c_in, "source image tree")->required();
    corrupt->add_option("--out", c_out, "destination root")->required();
    corrupt->add_option("--kernels", c_kernels, "OKF1 kernel file")->required();
    corrupt->add_option("--corruptions", c_corrs, "corruption names (default: the four optical ones)")->delimiter(',');
    corrupt->add_option("--severities", c_sevs, "severities")->delimiter(',')->capture_default_str();
    corrupt->add_option("--format", c_format, "png or jpeg")->check(CLI::IsMember({"png", "jpeg"}))->capture_default_str();
    corrupt->add_flag("--anisotropic", c_aniso, "resize both sides to 256 instead of the short side");

    // charts
    auto* charts = app.add_subcommand("charts", "write the slanted edge and spilled coins test charts as PNG");
    std::string ch_out = ".";
    double ch_angle = 5.0;
    int ch_size = kChartSize;
    charts->add_option("--out-dir", ch_out, "output directory")->capture_default_str();
    charts->add_option("--angle", ch_angle, "slanted edge angle in degrees")->capture_default_str();
    charts->add_option("--size", ch_size, "chart side in pixels")->capture_default_str();

    // measure
    auto* measure = app.add_subcommand("measure", "quality metrics between two images or two kernels");
    std::string ms_ref, ms_test, ms_kernels, ms_a, ms_b;
    measure->add_option("--ref", ms_ref, "reference image");
    measure->add_option("--test", ms_test, "test image");
    measure->add_option("--kernels", ms_kernels, "OKF1 kernel file");
    measure->add_option("--label", ms_a, "kernel label, e.g. coma/3/0");
    measure->add_option("--against", ms_b, "second kernel label; the disk baseline is always available");

    // augment
    auto* augment = app.add_subcommand("augment", "write an optically augmented copy of an image directory");
    std::string a_in, a_out, a_kernels;
    int a_sev = 3;
    bool a_all = false;
    double a_alpha = 1.0;
    std::vector<double> a_mean(kDefaultMean.begin(), kDefaultMean.end()), a_std(kDefaultStd.begin(), kDefaultStd.end());
    augment->add_option("--in", a_in, "source image tree")->required();
    augment->add_option("--out", a_out, "destination directory")->required();
    augment->add_option("--kernels", a_kernels, "OKF1 kernel file")->required();
    augment->add_option("--severity", a_sev, "kernel severity")->capture_default_str();
    augment->add_flag("--all-severities", a_all, "draw kernels from every severity");
    augment->add_option("--alpha", a_alpha, "Beta(alpha, alpha) mixing parameter")->capture_default_str();
    augment->add_option("--mean", a_mean, "per-channel mean (recorded in the draw log)")->expected(3);
    augment->add_option("--std", a_std, "per-channel std (recorded in the draw log)")->expected(3);

    // score
    auto* score_cmd = app.add_subcommand("score", "accuracy tables, deltas, rank correlation and gains from prediction logs");
    std::vector<std::string> s_logs;
    std::string s_baseline = "defocus_blur", s_out = "scores", s_plain, s_aug;
    bool s_aggregate = false;
    score_cmd->add_option("--log", s_logs, "prediction log CSV (repeatable; model name = file stem)");
    score_cmd->add_option("--baseline", s_baseline, "baseline corruption for deltas")->capture_default_str();
    score_cmd->add_option("--out", s_out, "output path prefix")->capture_default_str();
    score_cmd->add_flag("--aggregate-tau", s_aggregate, "rank models by mean accuracy over severities");
    score_cmd->add_option("--gain-plain", s_plain, "log of the model trained without augmentation");
    score_cmd->add_option("--gain-augmented", s_aug, "log of the model trained with augmentation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const unsigned threads = g.threads == 0 ? default_thread_count() : g.threads;
        g.threads = threads;

        if (*gen) {
            const auto cfg = gen_opts.config(g);
            if (gen_report.empty()) gen_report = gen_out + ".report.csv";
            ConfigEcho e("generate");
            e.add("out", gen_out).add("report", gen_report).add("rg_out", gen_rg.empty() ? "-" : gen_rg);
            e.add("with_baseline", gen_baseline).add("seed", g.seed).add("threads", threads);
            gen_opts.echo(e);
            e.print();
            const auto pupil = build_pupil(gen_opts.grid, gen_opts.pupil, gen_opts.samples_per_pixel);
            auto bench = build_benchmark_stack(cfg, pupil);
            if (gen_baseline)
                for (const auto& [label, k] : bench.baselines) bench.stack.insert(k);
            write_kernel_file(bench.stack, gen_out);
            if (!gen_rg.empty()) write_kernel_file(bench.rg_stack, gen_rg);
            std::ostringstream rep;
            write_match_reports(rep, bench.reports);
            write_text_file(gen_report, rep.str());
            for (const auto& r : bench.reports)
                if (g.verbose || !r.flags.empty()) print_report(std::cout, r);
            std::cout << "wrote " << bench.stack.size() << " kernels to " << gen_out << '\n';
        } else if (*match) {
            auto cfg = m_opts.config(g);
            const Corruption c = corruption_arg(m_corr);
            if (m_guess) cfg.initial_guess[m_sev] = *m_guess;
            ConfigEcho e("match");
            e.add("corruption", corruption_name(c)).add("severity", m_sev).add("variant", m_var);
            e.add("initial_guess", m_guess ? format_number(*m_guess) : std::string("calibrated"));
            e.add("seed", g.seed).add("threads", threads);
            m_opts.echo(e);
            e.print();
            const auto pupil = build_pupil(m_opts.grid, m_opts.pupil, m_opts.samples_per_pixel);
            const auto r = match_kernel(c, m_sev, m_var, disk_baseline_kernel(m_sev), cfg, pupil);
            print_report(std::cout, r);
            for (const auto& t : r.terms)
                std::printf("    %-14s %4s  candidate %-12.6g baseline %-12.6g distance %-10.4g weight %.4g\n",
                            t.metric.c_str(), t.angle_deg ? std::to_string(*t.angle_deg).c_str() : "", t.candidate,
                            t.baseline, t.distance, t.weight);
            if (!m_report.empty()) {
                std::ostringstream rep;
                write_match_reports(rep, {r});
                write_text_file(m_report, rep.str());
            }
        } else if (*corrupt) {
            CorruptionJob job;
            job.src_root = c_in;
            job.dst_root = c_out;
            job.stack = read_kernel_file(c_kernels);
            job.seed = g.seed;
            job.threads = threads;
            job.format = c_format == "png" ? ImageFormat::png : ImageFormat::jpeg;
            job.anisotropic_resize = c_aniso;
            job.severities = c_sevs;
            if (!c_corrs.empty()) {
                job.corruptions.clear();
                for (const auto& n : c_corrs) job.corruptions.push_back(corruption_arg(n));
            }
            std::vector<std::string> names;
            for (auto c : job.corruptions) names.emplace_back(corruption_name(c));
            ConfigEcho e("corrupt");
            e.add("in", c_in).add("out", c_out).add("kernels", c_kernels).add("corruptions", join(names));
            e.add("severities", join_num(c_sevs)).add("format", c_format).add("anisotropic", c_aniso);
            e.add("seed", g.seed).add("threads", threads);
            e.print();
            const auto m = corrupt_dataset(job);
            std::cout << "wrote " << m.rows.size() << " images, " << m.errors.size() << " skipped; manifest "
                      << (fs::path(c_out) / "manifest.csv").string() << '\n';
            for (const auto& err : m.errors) std::cerr << "skipped " << err.path << ": " << err.message << '\n';
            return m.errors.empty() ? 0 : 1;
        } else if (*charts) {
            ConfigEcho e("charts");
            e.add("out_dir", ch_out).add("angle_deg", ch_angle).add("size", ch_size).add("seed", g.seed);
            e.print();
            fs::create_directories(ch_out);
            const auto edge = gen_slanted_edge(ch_angle, ch_size);
            const auto coins = gen_spilled_coins(g.seed, ch_size);
            write_image(fs::path(ch_out) / "slanted_edge.png", edge.pixels);
            write_image(fs::path(ch_out) / "spilled_coins.png", coins.pixels);
            std::cout << "wrote slanted_edge.png and spilled_coins.png to " << ch_out << '\n';
        } else if (*measure) {
            ConfigEcho e("measure");
            e.add("ref", ms_ref.empty() ? "-" : ms_ref).add("test", ms_test.empty() ? "-" : ms_test);
            e.add("kernels", ms_kernels.empty() ? "-" : ms_kernels).add("label", ms_a.empty() ? "-" : ms_a);
            e.add("against", ms_b.empty() ? "-" : ms_b).add("seed", g.seed);
            e.print();
            if (!ms_ref.empty() || !ms_test.empty()) {
                if (ms_ref.empty() || ms_test.empty()) throw ConfigError("--ref and --test go together");
                const auto a = read_image(ms_ref), b = read_image(ms_test);
                std::cout << "ssim " << format_number(ssim(a, b)) << '\n';
                std::cout << "psnr " << format_number(psnr(a, b)) << '\n';
                const auto tex = texture_mtf(to_gray(a), to_gray(b));
                const auto m50 = mtf50(tex);
                std::cout << "texture_mtf50 " << (m50 ? format_number(*m50) : "none") << '\n';
                std::cout << "acutance " << format_number(acutance(tex)) << '\n';
            } else {
                if (ms_a.empty()) throw ConfigError("measure needs --ref/--test or --label");
                KernelStack stack;
                if (!ms_kernels.empty()) stack = read_kernel_file(ms_kernels);
                auto lookup = [&](const std::string& text) {
                    const auto l = label_arg(text);
                    if (const Kernel* k = stack.find(l)) return *k;
                    if (l.corruption == Corruption::disk_baseline) return disk_baseline_kernel(l.severity);
                    throw ConfigError("no kernel " + l.to_string() + (ms_kernels.empty() ? " (no --kernels given)" : ""));
                };
                const Kernel a = lookup(ms_a);
                for (int c = 0; c < kChannels; ++c) {
                    const auto mtf = mtf2d(a.channel(c));
                    std::cout << channel_name(c) << ':';
                    for (int ang : kSliceAngles) {
                        const auto curve = mtf_slice(mtf, ang);
                        const auto m = mtf50(curve);
                        std::cout << "  mtf50@" << ang << '=' << (m ? format_number(*m) : "none") << " auc@" << ang << '='
                                  << format_number(auc(curve));
                    }
                    std::cout << '\n';
                }
                if (!ms_b.empty()) {
                    MatchConfig cfg;
                    cfg.chart_seed = g.seed;
                    const MatchCharts mc(cfg.edge_angle_deg, cfg.chart_seed);
                    auto r = kernel_distance(a, lookup(ms_b), mc, cfg);
                    r.label = a.label;
                    for (const auto& t : r.terms)
                        std::printf("%-14s %4s  a %-12.6g b %-12.6g distance %-10.4g weight %.4g\n", t.metric.c_str(),
                                    t.angle_deg ? std::to_string(*t.angle_deg).c_str() : "", t.candidate, t.baseline,
                                    t.distance, t.weight);
                    std::cout << "composite " << format_number(r.composite) << '\n';
                }
            }
        } else if (*augment) {
            AugmentConfig cfg;
            cfg.stack = read_kernel_file(a_kernels);
            cfg.severity = a_sev;
            cfg.all_severities = a_all;
            cfg.alpha = a_alpha;
            cfg.seed = g.seed;
            cfg.threads = threads;
            for (int c = 0; c < kChannels; ++c) {
                cfg.mean[c] = a_mean.at(c);
                cfg.stddev[c] = a_std.at(c);
            }
            cfg.validate();
            ConfigEcho e("augment");
            e.add("in", a_in).add("out", a_out).add("kernels", a_kernels).add("severity", a_all ? "all" : std::to_string(a_sev));
            e.add("alpha", a_alpha).add("mean", join_num(a_mean)).add("std", join_num(a_std));
            e.add("seed", g.seed).add("threads", threads);
            e.print();
            // Images are written before normalization, which only makes sense for tensors.
            const auto files = list_images(a_in);
            std::ostringstream log;
            log << "path,sample,corruption,severity,variant,p\n";
            Augmentor aug(cfg);
            std::size_t skipped = 0;
            for (std::size_t i = 0; i < files.size(); ++i) {
                Image8 img;
                try {
                    img = preprocess(read_image(fs::path(a_in) / files[i]));
                } catch (const Error& err) {
                    std::cerr << "skipped " << files[i] << ": " << err.what() << '\n';
                    ++skipped;
                    continue;
                }
                ImageBatch batch(1, img.height, img.width);
                for (std::size_t j = 0; j < img.data.size(); ++j) batch.data[j] = img.data[j] / 255.0f;
                std::vector<MixDraw> draws;
                const ImageBatch mixed = optics_mix_batch(batch, cfg, i, &draws);
                Image8 out(img.width, img.height, 3);
                for (std::size_t j = 0; j < out.data.size(); ++j) out.data[j] = saturate_u8(mixed.data[j] * 255.0);
                const fs::path dst = fs::path(a_out) / (fs::path(files[i]).replace_extension(".png"));
                fs::create_directories(dst.parent_path());
                write_image(dst, out);
                const auto& d = draws.front();
                log << csv_field(files[i]) << ',' << i << ',' << corruption_name(d.kernel.corruption) << ','
                    << d.kernel.severity << ',' << d.kernel.variant << ',' << format_number(d.p) << '\n';
            }
            write_text_file(fs::path(a_out) / "draws.csv", log.str());
            std::cout << "augmented " << files.size() - skipped << " images into " << a_out << '\n';
            return skipped == 0 ? 0 : 1;
        } else if (*score_cmd) {
            ConfigEcho e("score");
            e.add("logs", s_logs.empty() ? "-" : join(s_logs)).add("baseline", s_baseline).add("out", s_out);
            e.add("tau_ranking", s_aggregate ? "aggregate" : "per-cell");
            e.add("gain_plain", s_plain.empty() ? "-" : s_plain).add("gain_augmented", s_aug.empty() ? "-" : s_aug);
            e.print();
            if (s_logs.empty() && s_plain.empty()) throw ConfigError("score needs --log or --gain-plain/--gain-augmented");
            if (!s_logs.empty()) {
                std::vector<ScoreTable> tables;
                for (const auto& p : s_logs) tables.push_back(score(read_prediction_log(p), s_baseline));
                std::ostringstream csv, txt;
                write_score_csv(csv, tables);
                write_score_text(txt, tables);
                write_text_file(s_out + ".csv", csv.str());
                write_text_file(s_out + ".txt", txt.str());
                std::cout << txt.str();
                if (tables.size() >= 2) {
                    std::ostringstream tau;
                    tau << "corruption,severity,tau\n";
                    for (const auto& row : kendall_vs_baseline(tables, s_aggregate))
                        tau << row.corruption << ',' << row.severity << ',' << format_number(row.tau) << '\n';
                    write_text_file(s_out + ".kendall.csv", tau.str());
                }
            }
            if (!s_plain.empty() || !s_aug.empty()) {
                if (s_plain.empty() || s_aug.empty()) throw ConfigError("--gain-plain and --gain-augmented go together");
                const auto plain = read_prediction_log(s_plain);
                const auto gains = gain_table(plain, read_prediction_log(s_aug), s_baseline);
                std::ostringstream os;
                write_gain_table(os, {{plain.model, gains}});
                write_text_file(s_out + ".gain.csv", os.str());
                std::cout << os.str();
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
