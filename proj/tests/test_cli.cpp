#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "prsans/cli/cli.hpp"
#include "prsans/detector_image.hpp"
#include "prsans/image_io.hpp"
#include "prsans/nn/checkpoint.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunOutcome {
    int code = -1;
    std::string err;
};

// In-process driver; stderr is captured through the stream buffer so the
// reported dotted paths can be asserted on.
RunOutcome run(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"prsans"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream captured;
    auto* old = std::cerr.rdbuf(captured.rdbuf());
    RunOutcome out;
    out.code = prsans::cli::run_cli(static_cast<int>(argv.size()), argv.data());
    std::cerr.rdbuf(old);
    out.err = captured.str();
    return out;
}

fs::path scratch_root() {
    static fs::path root = [] {
        auto p = fs::temp_directory_path() / "prsans_cli_test";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

std::string write_config(const std::string& name, const json& j) {
    auto path = scratch_root() / name;
    std::ofstream(path) << j.dump(2) << "\n";
    return path.string();
}

std::string out_dir(const std::string& name) { return (scratch_root() / name).string(); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json synth_config(double time_factor = 2.0) {
    json geometry = {{"wavelength", 6.0},
                     {"sample_detector_distance", 15.5},
                     {"pixel_pitch", 2.933e-2},
                     {"width", 48},
                     {"height", 48},
                     {"beam_cx", 24.0},
                     {"beam_cy", 24.0}};
    json model = {{"kind", "sphere"}, {"radius", 225.0}, {"scale", 25.0}, {"background", 0.5}};
    json acquire = {{"mode", "poisson"}, {"time_factor", time_factor}};
    return {{"geometry", geometry}, {"model", model}, {"acquire", acquire}, {"seed", 31}};
}

double metric_snr(const fs::path& metrics_csv) {
    std::istringstream in(slurp(metrics_csv));
    std::string header, row;
    std::getline(in, header);
    REQUIRE(header == "snr_db,rmse,nmse,mae");
    std::getline(in, row);
    return std::stod(row.substr(0, row.find(',')));
}

}  // namespace

TEST_CASE("usage errors and help have distinct exits") {
    CHECK(run({"--help"}).code == 0);
    CHECK(run({}).code == 3);
    CHECK(run({"no-such-command"}).code == 3);
    auto missing_flag = run({"restore"});
    CHECK(missing_flag.code == 3);
    auto missing_file = run({"restore", "--config", out_dir("nowhere.json")});
    CHECK(missing_file.code == 2);
    CHECK(missing_file.err.find("error:") != std::string::npos);
}

TEST_CASE("config violations exit 3 naming the offending key") {
    auto bad_json = scratch_root() / "broken.json";
    std::ofstream(bad_json) << "{ not json";
    CHECK(run({"synth", "--config", bad_json.string()}).code == 3);

    auto cfg = synth_config();
    cfg["extra_key"] = 1;
    auto unknown = run({"synth", "--config", write_config("unknown.json", cfg),
                        "--out", out_dir("unknown_out")});
    CHECK(unknown.code == 3);
    CHECK(unknown.err.find("extra_key") != std::string::npos);

    // the input image is opened before the solve block parses, so the
    // config errors need a readable image in place
    auto img_path = (scratch_root() / "tiny.prsi").string();
    prsans::write_image(img_path, prsans::make_image(4, 4, 1.0f));

    json restore_cfg = {{"input", img_path},
                        {"prior", {{"type", "tv"}, {"strength", 0.1}}},
                        {"solve", {{"gamma", -1.0}}}};
    auto bad_gamma = run({"restore", "--config", write_config("bad_gamma.json", restore_cfg),
                          "--out", out_dir("bad_gamma_out")});
    CHECK(bad_gamma.code == 3);
    CHECK(bad_gamma.err.find("solve.gamma") != std::string::npos);

    json bad_prior = {{"input", img_path}, {"prior", {{"type", "wavelet"}}}};
    auto bp = run({"restore", "--config", write_config("bad_prior.json", bad_prior),
                   "--out", out_dir("bad_prior_out")});
    CHECK(bp.code == 3);
    CHECK(bp.err.find("prior.type") != std::string::npos);

    json missing_input = {{"input", out_dir("gone.prsi")},
                          {"prior", {{"type", "tv"}, {"strength", 0.1}}}};
    CHECK(run({"restore", "--config", write_config("missing_input.json", missing_input),
               "--out", out_dir("missing_input_out")}).code == 2);
}

TEST_CASE("synthesis, restoration, evaluation, and reduction chain together") {
    auto synth_dir = out_dir("synth");
    auto r = run({"synth", "--config", write_config("synth.json", synth_config()),
                  "--out", synth_dir});
    REQUIRE(r.code == 0);
    REQUIRE(fs::exists(fs::path(synth_dir) / "clean.prsi"));
    REQUIRE(fs::exists(fs::path(synth_dir) / "noisy.prsi"));

    json restore_cfg = {{"input", (fs::path(synth_dir) / "noisy.prsi").string()},
                        {"reference", (fs::path(synth_dir) / "clean.prsi").string()},
                        {"prior", {{"type", "tv"}, {"strength", 0.05}}},
                        {"solve", {{"gamma", 0.7}, {"tau", 1.0}, {"max_iter", 18}}},
                        {"seed", 4}};
    auto restore_dir = out_dir("restore");
    auto rr = run({"restore", "--config", write_config("restore.json", restore_cfg),
                   "--out", restore_dir});
    REQUIRE(rr.code == 0);
    REQUIRE(fs::exists(fs::path(restore_dir) / "restored.prsi"));
    REQUIRE(fs::exists(fs::path(restore_dir) / "trace.csv"));

    // the denoised image must beat the noisy input against the reference
    json eval_cfg = {{"image", (fs::path(synth_dir) / "noisy.prsi").string()},
                     {"reference", (fs::path(synth_dir) / "clean.prsi").string()}};
    auto eval_dir = out_dir("eval_noisy");
    REQUIRE(run({"eval", "--config", write_config("eval.json", eval_cfg),
                 "--out", eval_dir}).code == 0);
    const double snr_noisy = metric_snr(fs::path(eval_dir) / "metrics.csv");
    const double snr_restored = metric_snr(fs::path(restore_dir) / "metrics.csv");
    CHECK(snr_restored > snr_noisy + 1.0);

    // trace rows follow the solve budget
    std::istringstream trace(slurp(fs::path(restore_dir) / "trace.csv"));
    std::string line;
    int rows = -1;
    while (std::getline(trace, line)) ++rows;
    CHECK(rows == 18);

    json reduce_cfg = {{"input", (fs::path(synth_dir) / "clean.prsi").string()},
                       {"geometry", synth_config()["geometry"]},
                       {"n_bins", 40},
                       {"binning", "linear"}};
    auto reduce_dir = out_dir("reduce");
    REQUIRE(run({"reduce", "--config", write_config("reduce.json", reduce_cfg),
                 "--out", reduce_dir}).code == 0);
    std::istringstream iq(slurp(fs::path(reduce_dir) / "iq.csv"));
    std::getline(iq, line);
    CHECK(line == "q,intensity,pixel_count");
    rows = 0;
    while (std::getline(iq, line)) ++rows;
    CHECK(rows == 40);
}

TEST_CASE("repeated runs produce byte-identical artifacts") {
    auto cfg = write_config("synth_repeat.json", synth_config());
    auto d1 = out_dir("repeat1");
    auto d2 = out_dir("repeat2");
    REQUIRE(run({"synth", "--config", cfg, "--out", d1}).code == 0);
    REQUIRE(run({"synth", "--config", cfg, "--out", d2}).code == 0);
    for (const char* name : {"clean.prsi", "noisy.prsi", "resolved_config.json"})
        CHECK(slurp(fs::path(d1) / name) == slurp(fs::path(d2) / name));

    // a different seed moves the noise but not the clean pattern
    auto d3 = out_dir("repeat3");
    REQUIRE(run({"synth", "--config", cfg, "--out", d3, "--seed", "77"}).code == 0);
    CHECK(slurp(fs::path(d1) / "clean.prsi") == slurp(fs::path(d3) / "clean.prsi"));
    CHECK(slurp(fs::path(d1) / "noisy.prsi") != slurp(fs::path(d3) / "noisy.prsi"));
}

TEST_CASE("the resolved config replays the run exactly") {
    auto d1 = out_dir("resolved1");
    REQUIRE(run({"synth", "--config", write_config("synth_rp.json", synth_config()),
                 "--out", d1}).code == 0);
    auto d2 = out_dir("resolved2");
    REQUIRE(run({"synth", "--config", (fs::path(d1) / "resolved_config.json").string(),
                 "--out", d2}).code == 0);
    for (const char* name : {"clean.prsi", "noisy.prsi", "resolved_config.json"})
        CHECK(slurp(fs::path(d1) / name) == slurp(fs::path(d2) / name));
}

TEST_CASE("the manifest records every artifact with its size and hash") {
    auto d = out_dir("manifest");
    REQUIRE(run({"synth", "--config", write_config("synth_m.json", synth_config()),
                 "--out", d}).code == 0);
    auto manifest = json::parse(slurp(fs::path(d) / "run_manifest.json"));
    REQUIRE(manifest.contains("outputs"));
    const auto& arts = manifest["outputs"];
    std::vector<std::string> names;
    for (const auto& a : arts) names.push_back(a.at("file").get<std::string>());
    CHECK(names == std::vector<std::string>{"clean.prsi", "noisy.prsi", "resolved_config.json"});

    for (const auto& a : arts) {
        const auto bytes = slurp(fs::path(d) / a.at("file").get<std::string>());
        CHECK(a.at("bytes").get<std::uint64_t>() == bytes.size());
        // independent FNV-1a 64 recomputation
        std::uint64_t h = 0xCBF29CE484222325ull;
        for (unsigned char c : bytes) {
            h ^= c;
            h *= 0x100000001B3ull;
        }
        char hex[20];
        std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
        CHECK(a.at("fnv1a64").get<std::string>() == hex);
    }
}

TEST_CASE("certification runs exit 0 on a pass and 5 on a failed bound") {
    json cfg = {{"gmm",
                 {{"weights", {0.6, 0.4}},
                  {"means", {{-1.0}, {1.5}}},
                  {"variances", {0.5, 0.8}}}},
                {"sigma", 0.5},
                {"y", {0.3}},
                {"schedule", "pow:0.05:1"},
                {"solve", {{"gamma", 0.4}, {"tau", 1.0}, {"max_iter", 200}}},
                {"seed", 11}};
    auto pass_dir = out_dir("certify_pass");
    auto ok = run({"verify-theory", "--config", write_config("certify.json", cfg),
                   "--out", pass_dir});
    REQUIRE(ok.code == 0);
    auto report = json::parse(slurp(fs::path(pass_dir) / "report.json"));
    CHECK(report.at("passed").get<bool>());
    CHECK(fs::exists(fs::path(pass_dir) / "report.csv"));

    // with the error budget collapsed, the constant-schedule gradient floor
    // crosses the decaying B1/t envelope near t = 280
    json fail_cfg = cfg;
    fail_cfg["schedule"] = "const:0.05";
    fail_cfg["b2_scale"] = 1e-6;
    fail_cfg["solve"]["max_iter"] = 500;
    auto fail_dir = out_dir("certify_fail");
    auto bad = run({"verify-theory", "--config", write_config("certify_fail.json", fail_cfg),
                    "--out", fail_dir});
    CHECK(bad.code == 5);
    CHECK(bad.err.find("bound at t=") != std::string::npos);
    // the report artifacts survive the failure for inspection
    auto failed_report = json::parse(slurp(fs::path(fail_dir) / "report.json"));
    CHECK(!failed_report.at("passed").get<bool>());
    CHECK(fs::exists(fs::path(fail_dir) / "report.csv"));

    json infeasible = cfg;
    infeasible["solve"]["gamma"] = 5.0;
    auto inf = run({"verify-theory", "--config", write_config("certify_inf.json", infeasible),
                    "--out", out_dir("certify_inf")});
    CHECK(inf.code == 3);
    CHECK(inf.err.find("feasible") != std::string::npos);
}

TEST_CASE("training commands produce checkpoints wired for adaptation") {
    json pre_cfg = {{"dataset",
                     {{"kind", "textures"}, {"n_patches", 24}, {"patch", 12}, {"sigma", 0.08}}},
                    {"arch", {{"depth", 2}, {"channels", 3}, {"kernel_size", 3}}},
                    {"train", {{"epochs", 3}, {"lr", 0.03}, {"batch", 8}}},
                    {"seed", 6}};
    auto pre_dir = out_dir("pretrain");
    REQUIRE(run({"pretrain", "--config", write_config("pretrain.json", pre_cfg),
                 "--out", pre_dir}).code == 0);
    const auto ckpt_path = fs::path(pre_dir) / "checkpoint.prsc";
    REQUIRE(fs::exists(ckpt_path));
    auto pre_net = prsans::nn::load_checkpoint(ckpt_path.string());
    CHECK(pre_net.provenance == prsans::nn::Provenance::pretrained);
    CHECK(pre_net.arch.depth == 2);

    std::istringstream curve(slurp(fs::path(pre_dir) / "curve.csv"));
    std::string line;
    std::getline(curve, line);
    CHECK(line == "epoch,train_loss,val_loss");
    int rows = 0;
    while (std::getline(curve, line)) ++rows;
    CHECK(rows == 3);

    json target = {{"patch", 12},
                   {"n_pairs", 6},
                   {"geometry", synth_config()["geometry"]},
                   {"models", json::array({synth_config()["model"]})},
                   {"acquire", {{"mode", "poisson"}, {"time_factor", 4.0}}}};
    json adapt_cfg = {{"source_checkpoint", ckpt_path.string()},
                      {"target", target},
                      {"train", {{"epochs", 2}, {"lr", 0.01}, {"batch", 4}}},
                      {"seed", 8}};
    auto adapt_dir = out_dir("adapt");
    REQUIRE(run({"adapt", "--config", write_config("adapt.json", adapt_cfg),
                 "--out", adapt_dir}).code == 0);
    auto adapted = prsans::nn::load_checkpoint((fs::path(adapt_dir) / "adapted.prsc").string());
    CHECK(adapted.provenance == prsans::nn::Provenance::adapted);
    CHECK(adapted.adapted_pairs == 6);

    json sweep_cfg = {{"source_checkpoint", ckpt_path.string()},
                      {"target", target},
                      {"ks", {0, 4}},
                      {"eval", {{"n_pairs", 8}}},
                      {"train", {{"epochs", 2}, {"lr", 0.01}, {"batch", 4}}},
                      {"include_zero_start", true},
                      {"seed", 8}};
    auto sweep_dir = out_dir("sweep");
    REQUIRE(run({"sweep-adaptation", "--config", write_config("sweep.json", sweep_cfg),
                 "--out", sweep_dir}).code == 0);
    std::istringstream sweep(slurp(fs::path(sweep_dir) / "sweep.csv"));
    std::getline(sweep, line);
    CHECK(line == "k,val_mse,provenance");
    std::vector<std::string> tags;
    while (std::getline(sweep, line)) tags.push_back(line.substr(line.rfind(',') + 1));
    CHECK(tags == std::vector<std::string>{"adapted(0)", "adapted(4)", "zero_start"});
}

TEST_CASE("output directories are created on demand") {
    auto nested = (scratch_root() / "deep" / "nested" / "dir").string();
    REQUIRE(run({"synth", "--config", write_config("synth_deep.json", synth_config()),
                 "--out", nested}).code == 0);
    CHECK(fs::exists(fs::path(nested) / "clean.prsi"));
}
