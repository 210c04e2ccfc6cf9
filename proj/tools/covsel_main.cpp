#include "covsel/criterion.hpp"
#include "covsel/geno.hpp"
#include "covsel/io.hpp"
#include "covsel/regression.hpp"
#include "covsel/resampling.hpp"
#include "covsel/rng.hpp"
#include "covsel/selector.hpp"
#include "covsel/simulation.hpp"
#include "covsel/types.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using covsel::CandidateSet;
using covsel::GuardPolicy;
using covsel::ModelSubset;
using covsel::MultiSampleCollection;
using json = nlohmann::json;

constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// shared option groups

struct DataArgs {
    std::string path;
    std::string id_col = "id";
    std::string y_col = "y";
    std::string x_cols;  // comma separated; empty = every other column
    int min_size = 1;
    double eps_cond = 1e-10;
};

void add_data_flags(CLI::App* cmd, DataArgs& args) {
    cmd->add_option("--data", args.path, "input CSV with one row per observation")->required();
    cmd->add_option("--id-col", args.id_col, "dataset id column (default id)");
    cmd->add_option("--y-col", args.y_col, "response column (default y)");
    cmd->add_option("--x-cols", args.x_cols,
                    "comma-separated covariate columns (default: all other columns)");
    cmd->add_option("--min-size", args.min_size, "drop datasets with fewer rows (default 1)");
    cmd->add_option("--eps-cond", args.eps_cond,
                    "relative eigenvalue floor of the invertibility guard (default 1e-10)");
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    for (char c : text) {
        if (c == ',') {
            if (!item.empty()) out.push_back(item);
            item.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            item += c;
        }
    }
    if (!item.empty()) out.push_back(item);
    return out;
}

struct LoadedData {
    MultiSampleCollection collection;
    covsel::io::CollectionSchema schema;
    covsel::io::LoadReport report;
};

LoadedData load_data(const DataArgs& args) {
    LoadedData data;
    data.schema.id_column = args.id_col;
    data.schema.response_column = args.y_col;
    data.schema.min_rows = args.min_size;
    if (args.x_cols.empty()) {
        covsel::io::CsvTable head = covsel::io::read_csv(args.path);
        for (const std::string& col : head.header) {
            if (col != args.id_col && col != args.y_col) {
                data.schema.covariate_columns.push_back(col);
            }
        }
    } else {
        data.schema.covariate_columns = split_list(args.x_cols);
    }
    data.collection = covsel::io::load_collection(args.path, data.schema, &data.report);
    if (data.collection.empty()) {
        throw covsel::DataError("no datasets survive loading " + args.path);
    }
    return data;
}

// ---------------------------------------------------------------------------
// candidate specification files

struct Candidates {
    CandidateSet set;
    std::vector<ModelSubset> models;
    std::vector<std::string> labels;  // parallel to models

    std::string label_of(const ModelSubset& m) const {
        for (std::size_t i = 0; i < models.size(); ++i) {
            if (models[i] == m) return labels[i];
        }
        return m.label();
    }
    const ModelSubset& by_label(const std::string& label) const {
        for (std::size_t i = 0; i < models.size(); ++i) {
            if (labels[i] == label) return models[i];
        }
        throw covsel::DataError("unknown model label '" + label + "' in the candidate file");
    }
};

int resolve_name(const std::string& name, const std::vector<std::string>& names) {
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (names[j] == name) return static_cast<int>(j);
    }
    throw covsel::MissingColumn(name);
}

Candidates load_candidates(const std::string& path, const std::vector<std::string>& names) {
    std::ifstream in(path);
    if (!in) throw covsel::DataError("cannot open candidate file: " + path);
    json spec = json::parse(in);

    const bool intercept = spec.value("intercept", true);
    const std::string mode = spec.value("mode", "explicit");
    Candidates out;

    auto resolve_list = [&](const json& arr) {
        std::vector<int> cols;
        for (const auto& name : arr) cols.push_back(resolve_name(name.get<std::string>(), names));
        std::sort(cols.begin(), cols.end());
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
        return cols;
    };
    auto with_intercept = [&intercept](std::vector<int> cols) {
        if (intercept && !std::binary_search(cols.begin(), cols.end(), 0)) {
            cols.insert(cols.begin(), 0);
        }
        return cols;
    };

    if (mode == "explicit") {
        if (!spec.contains("models")) {
            throw covsel::DataError("candidate file: explicit mode needs a 'models' array");
        }
        for (const auto& entry : spec["models"]) {
            ModelSubset model(with_intercept(resolve_list(entry.at("covariates"))));
            out.labels.push_back(entry.value("label", model.label()));
            out.models.push_back(std::move(model));
        }
        out.set = CandidateSet::explicit_list(out.models, out.labels);
    } else if (mode == "subsets") {
        std::vector<int> forced = with_intercept(
            spec.contains("forced_in") ? resolve_list(spec["forced_in"]) : std::vector<int>{});
        std::vector<int> free = spec.contains("free") ? resolve_list(spec["free"])
                                                      : std::vector<int>{};
        if (spec.contains("forced_out")) resolve_list(spec["forced_out"]);  // names must exist
        out.set = CandidateSet::subsets(forced, free);
        out.models = covsel::enumerate_candidates(out.set);
        for (const auto& m : out.models) out.labels.push_back(m.label());
        out.set.models = out.models;
        out.set.labels = out.labels;
    } else {
        throw covsel::DataError("candidate file: unknown mode '" + mode + "'");
    }
    if (out.models.empty()) throw covsel::DataError("candidate file defines no models");
    return out;
}

// ---------------------------------------------------------------------------
// output plumbing

struct Output {
    std::string out_path;  // empty = stdout
    bool wide = false;
    covsel::io::LongTable table;
    json meta;

    void emit() {
        if (out_path.empty()) {
            covsel::io::CsvTable csv = table.to_csv();
            auto print_row = [](const std::vector<std::string>& row) {
                for (std::size_t i = 0; i < row.size(); ++i) {
                    if (i) std::cout << ',';
                    std::cout << covsel::io::csv_quote(row[i]);
                }
                std::cout << '\n';
            };
            print_row(csv.header);
            for (const auto& row : csv.rows) print_row(row);
            return;
        }
        table.write(out_path);
        if (wide) table.write_wide(out_path + ".wide.csv");
        std::ofstream meta_out(out_path + ".meta.json", std::ios::binary);
        meta_out << meta.dump(2) << '\n';
    }
};

json meta_base(const std::string& command, std::uint64_t seed) {
    json meta;
    meta["tool"] = "covsel";
    meta["version"] = kVersion;
    meta["command"] = command;
    meta["seed"] = seed;
    meta["rng"] = covsel::rng::kAlgorithm;
    return meta;
}

void attach_data_meta(json& meta, const DataArgs& args, const LoadedData& data) {
    meta["data"] = args.path;
    meta["min_size"] = args.min_size;
    meta["eps_cond"] = args.eps_cond;
    meta["datasets"] = data.collection.size();
    json dropped = json::array();
    for (const auto& [id, rows] : data.report.dropped) {
        dropped.push_back({{"id", id}, {"rows", rows}});
    }
    meta["dropped_datasets"] = dropped;
}

std::string flags_for(const covsel::AggregateCriterion& agg, bool chosen, bool ties,
                      bool mask_mismatch) {
    std::vector<std::string> flags;
    if (chosen) flags.push_back("chosen");
    if (ties) flags.push_back("ties_broken");
    if (mask_mismatch) flags.push_back("mask_mismatch");
    if (agg.jackknife_drops > 0) {
        flags.push_back("jackknife_drops=" + std::to_string(agg.jackknife_drops));
    }
    std::string out;
    for (const auto& f : flags) {
        if (!out.empty()) out += ';';
        out += f;
    }
    return out;
}

std::string fmt(double v) { return covsel::io::format_value(v); }

// ---------------------------------------------------------------------------
// subcommand argument blocks

struct FitArgs {
    DataArgs data;
    std::string candidates;
    std::string out;
    bool wide = false;
};

struct SelectArgs {
    DataArgs data;
    std::string candidates;
    int n = 0;
    std::vector<int> n_grid;
    bool uncorrected = false;
    bool strict_mask = false;
    bool wide = false;
    std::string out;
    std::uint64_t seed = 0;
};

struct GenoArgs {
    DataArgs data;
    std::string candidates;
    std::string analytic;  // "closed-form" switches to the curve mode
    std::string params_file;
    std::string p_label;
    std::string q_label;
    int n = 0;
    bool uncorrected = false;
    bool min_only = false;
    bool wide = false;
    std::string out;
    std::uint64_t seed = 0;
};

struct SimulateArgs {
    std::string experiment;
    std::string config_file;
    std::vector<int> n_grid;
    int reps = 0;
    int rows = 0;
    int test_pairs = 1;
    bool uncorrected = false;
    bool fresh_coefficients = false;
    std::uint64_t seed = 0;
    std::string out;
    bool wide = false;
};

struct BootstrapArgs {
    DataArgs data;
    std::string candidates;
    std::string statistic = "level";
    std::string p_label;
    std::string q_label;
    int n = 0;
    int B = 200;
    bool uncorrected = false;
    bool cheap = false;
    bool dataset_level = false;
    std::uint64_t seed = 0;
    std::string out;
    bool wide = false;
};

struct CvArgs {
    DataArgs data;
    std::string candidates;
    std::string p_label;
    int n = 0;
    int reps = 1000;
    std::uint64_t seed = 0;
    std::string out;
    bool wide = false;
};

covsel::sim::PolyModelParams params_from_json(const json& spec) {
    covsel::sim::PolyModelParams prm = covsel::sim::PolyModelParams::benchmark();
    if (spec.contains("b")) {
        const auto& b = spec["b"];
        if (b.size() != prm.b.size()) {
            throw covsel::DataError("params: 'b' must have 11 entries (b0..b10)");
        }
        for (std::size_t i = 0; i < prm.b.size(); ++i) prm.b[i] = b[i].get<double>();
    }
    if (spec.contains("a")) prm.quad_coeff = spec["a"].get<double>();
    if (spec.contains("sigma")) prm.noise_sd = spec["sigma"].get<double>();
    return prm;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw covsel::DataError("cannot open config file: " + path);
    return json::parse(in);
}

// ---------------------------------------------------------------------------
// subcommands

int run_fit(const FitArgs& args) {
    LoadedData data = load_data(args.data);
    Candidates cands = load_candidates(args.candidates, data.collection.at(0).covariate_names);
    GuardPolicy policy;
    policy.eps_cond = args.data.eps_cond;

    Output output;
    output.out_path = args.out;
    output.wide = args.wide;
    output.meta = meta_base("fit", 0);
    attach_data_meta(output.meta, args.data, data);

    json guard_drops = json::object();
    for (std::size_t mi = 0; mi < cands.models.size(); ++mi) {
        const ModelSubset& model = cands.models[mi];
        const std::string& label = cands.labels[mi];
        int drops = 0;
        for (const auto& ds : data.collection.datasets()) {
            covsel::GuardStatus guard = covsel::guard_check(ds, model, policy);
            if (!guard.invertible) {
                ++drops;
                output.table.add({ds.id, "", label, "guard_min_eigenvalue",
                                  fmt(guard.min_eigenvalue), "", "", "excluded"});
                continue;
            }
            covsel::FitResult fit = covsel::fit_ols(ds, model, policy);
            covsel::SandwichMoments mom = covsel::sandwich_moments(ds, model, fit);
            for (int j = 0; j < model.size(); ++j) {
                const auto col = static_cast<std::size_t>(model.indices()[static_cast<std::size_t>(j)]);
                output.table.add({ds.id, "", label, "beta[" + ds.covariate_names[col] + "]",
                                  fmt(fit.beta_hat(j)), "", "", ""});
            }
            output.table.add({ds.id, "", label, "rss_over_n", fmt(fit.rss_over_n), "", "", ""});
            output.table.add({ds.id, "", label, "trace_v", fmt(mom.trace_v), "", "", ""});
        }
        guard_drops[label] = drops;
    }
    output.meta["guard_drops"] = guard_drops;
    output.emit();
    return 0;
}

int run_select(const SelectArgs& args, bool curve_mode) {
    LoadedData data = load_data(args.data);
    Candidates cands = load_candidates(args.candidates, data.collection.at(0).covariate_names);
    GuardPolicy policy;
    policy.eps_cond = args.data.eps_cond;
    const bool corrected = !args.uncorrected;

    std::vector<int> grid = curve_mode ? args.n_grid : std::vector<int>{args.n};
    std::vector<covsel::SelectionResult> results = covsel::selection_curve(
        data.collection, cands.set, grid, corrected, policy, args.strict_mask);

    Output output;
    output.out_path = args.out;
    output.wide = args.wide;
    output.meta = meta_base(curve_mode ? "curve" : "select", args.seed);
    attach_data_meta(output.meta, args.data, data);
    output.meta["corrected"] = corrected;
    output.meta["strict_mask"] = args.strict_mask;
    output.meta["n_grid"] = grid;

    json j_used = json::object();
    const std::string exp = curve_mode ? "curve" : "select";
    const std::string metric = corrected ? "criterion_corrected" : "criterion";
    for (const auto& res : results) {
        for (const auto& [model, agg] : res.values) {
            const bool is_chosen = model == res.chosen;
            output.table.add({exp, std::to_string(res.n), cands.label_of(model), metric,
                              fmt(agg.value), "", std::to_string(agg.j_used),
                              flags_for(agg, is_chosen, is_chosen && res.ties_broken,
                                        res.mask_mismatch)});
            j_used[cands.label_of(model)] = agg.j_used;
        }
        output.table.add({exp, std::to_string(res.n), cands.label_of(res.chosen), "chosen", "1",
                          "", "", res.ties_broken ? "ties_broken" : ""});
    }
    output.meta["j_used"] = j_used;
    output.emit();
    return 0;
}

int run_geno(const GenoArgs& args) {
    Output output;
    output.out_path = args.out;
    output.wide = args.wide;
    output.meta = meta_base("geno", args.seed);
    const bool corrected = !args.uncorrected;

    if (!args.analytic.empty()) {
        if (args.analytic != "closed-form") {
            throw CLI::ValidationError("--analytic", "only 'closed-form' is available");
        }
        covsel::sim::PolyModelParams prm = covsel::sim::PolyModelParams::benchmark();
        if (!args.params_file.empty()) prm = params_from_json(read_json_file(args.params_file));
        std::vector<std::pair<std::string, ModelSubset>> named = covsel::sim::nested_candidates();
        std::vector<std::pair<ModelSubset, covsel::ArCurve>> curves;
        for (auto which : {covsel::sim::NestedModel::x1, covsel::sim::NestedModel::x1_to_x5,
                           covsel::sim::NestedModel::full}) {
            curves.emplace_back(covsel::sim::nested_subset(which),
                                covsel::sim::ar_curve(prm, which));
        }
        auto find = [&named](const std::string& label) -> const ModelSubset& {
            for (const auto& [name, model] : named) {
                if (name == label) return model;
            }
            throw covsel::DataError("analytic mode knows models p1, p2, p3; got '" + label + "'");
        };
        auto curve_of = [&curves](const ModelSubset& m) -> const covsel::ArCurve& {
            for (const auto& [model, curve] : curves) {
                if (model == m) return curve;
            }
            throw covsel::DataError("no curve for model");
        };
        const ModelSubset& p = find(args.p_label);
        output.meta["analytic"] = "closed-form";

        if (!args.q_label.empty() && !args.min_only) {
            covsel::GenoValue g =
                covsel::geno_from_curves(curve_of(p), curve_of(find(args.q_label)), args.n);
            output.table.add({"geno", std::to_string(args.n), args.p_label,
                              "geno_vs_" + args.q_label, g.str(), "", "", "analytic"});
        } else {
            for (const auto& [name, model] : named) {
                if (model == p) continue;
                covsel::GenoValue g =
                    covsel::geno_from_curves(curve_of(p), curve_of(model), args.n);
                output.table.add({"geno", std::to_string(args.n), args.p_label, "geno_vs_" + name,
                                  g.str(), "", "", "analytic"});
            }
            covsel::GenoMinResult m = covsel::geno_min_curves(curves, p, args.n);
            output.table.add({"geno", std::to_string(args.n), args.p_label, "geno_min",
                              m.value.str(), "", "", "analytic"});
        }
        output.emit();
        return 0;
    }

    if (args.data.path.empty() || args.candidates.empty()) {
        throw CLI::ValidationError("geno", "either --analytic or --data with --candidates");
    }
    LoadedData data = load_data(args.data);
    Candidates cands = load_candidates(args.candidates, data.collection.at(0).covariate_names);
    GuardPolicy policy;
    policy.eps_cond = args.data.eps_cond;
    attach_data_meta(output.meta, args.data, data);
    output.meta["corrected"] = corrected;
    if (corrected) {
        output.meta["trace_correction"] =
            "competitor trace bias-corrected by the per-dataset jackknife combination";
    }

    const ModelSubset& p = cands.by_label(args.p_label);
    if (!args.q_label.empty() && !args.min_only) {
        const ModelSubset& q = cands.by_label(args.q_label);
        covsel::GenoValue g = covsel::geno_hat(data.collection, p, q, args.n, corrected, policy);
        output.table.add({"geno", std::to_string(args.n), args.p_label,
                          "geno_vs_" + args.q_label, g.str(), "", "", ""});
    } else {
        for (std::size_t i = 0; i < cands.models.size(); ++i) {
            if (cands.models[i] == p) continue;
            covsel::GenoValue g =
                covsel::geno_hat(data.collection, p, cands.models[i], args.n, corrected, policy);
            output.table.add({"geno", std::to_string(args.n), args.p_label,
                              "geno_vs_" + cands.labels[i], g.str(), "", "", ""});
        }
        covsel::GenoMinResult m =
            covsel::geno_min(data.collection, p, cands.models, args.n, corrected, policy);
        std::string attain;
        for (const auto& a : m.attaining) {
            if (!attain.empty()) attain += ';';
            attain += "attained_by=" + cands.label_of(a);
        }
        output.table.add({"geno", std::to_string(args.n), args.p_label, "geno_min",
                          m.value.str(), "", "", attain});
    }
    output.emit();
    return 0;
}

int run_simulate(const SimulateArgs& args) {
    using namespace covsel::sim;
    json config = args.config_file.empty() ? json::object() : read_json_file(args.config_file);

    Output output;
    output.out_path = args.out;
    output.wide = args.wide;
    output.meta = meta_base("simulate", args.seed);
    output.meta["experiment"] = args.experiment;
    if (!args.config_file.empty()) output.meta["config_file"] = args.config_file;
    output.meta["config_echo"] = config;

    PolyModelParams prm = params_from_json(config);

    auto hyper_from_config = [&config]() {
        PopulationHyperParams hyper = PopulationHyperParams::benchmark();
        if (config.contains("mean_b")) {
            for (std::size_t i = 0; i < hyper.mean_b.size(); ++i) {
                hyper.mean_b[i] = config["mean_b"][i].get<double>();
            }
        }
        if (config.contains("sd_b")) {
            for (std::size_t i = 0; i < hyper.sd_b.size(); ++i) {
                hyper.sd_b[i] = config["sd_b"][i].get<double>();
            }
        }
        if (config.contains("a")) hyper.quad_coeff = config["a"].get<double>();
        if (config.contains("sigma")) hyper.noise_sd = config["sigma"].get<double>();
        if (config.contains("blocks")) {
            hyper.blocks.clear();
            for (const auto& b : config["blocks"]) {
                hyper.blocks.emplace_back(b[0].get<int>(), b[1].get<int>());
            }
        }
        return hyper;
    };

    if (args.experiment == "prediction-error") {
        const int reps = args.reps > 0 ? args.reps : 10000;
        std::vector<int> grid =
            args.n_grid.empty() ? std::vector<int>{30, 60, 120, 250} : args.n_grid;
        output.meta["reps"] = reps;
        output.meta["test_pairs"] = args.test_pairs;
        output.meta["sampling"] = "independent training sample per (n, replication)";
        int model_index = 0;
        for (auto which : {NestedModel::x1, NestedModel::x1_to_x5, NestedModel::full}) {
            const std::string label = nested_label(which);
            for (int n : grid) {
                McEstimate mc = mc_prediction_error(
                    prm, nested_subset(which), n, reps,
                    covsel::rng::derive(args.seed,
                                        static_cast<std::uint64_t>(model_index * 1000 + n)),
                    args.test_pairs);
                output.table.add({"prediction-error", std::to_string(n), label,
                                  "mc_prediction_error", fmt(mc.mean), fmt(mc.std_error), "",
                                  mc.guard_failures
                                      ? "guard_failures=" + std::to_string(mc.guard_failures)
                                      : ""});
                output.table.add({"prediction-error", std::to_string(n), label, "ar_closed_form",
                                  fmt(ar_closed_form(prm, which, n)), "", "", ""});
            }
            ++model_index;
        }
    } else if (args.experiment == "criterion-crossing") {
        const int reps = args.reps > 0 ? args.reps : 1000;
        const int rows = args.rows > 0 ? args.rows : 40;
        std::vector<int> grid = args.n_grid;
        if (grid.empty()) {
            for (int n = 30; n <= 250; n += 20) grid.push_back(n);
        }
        output.meta["reps"] = reps;
        output.meta["rows"] = rows;
        std::vector<ModelSubset> models{nested_subset(NestedModel::x1),
                                        nested_subset(NestedModel::x1_to_x5)};
        MeanCriterionCurves curves = mean_criterion_curves(prm, models, rows, reps, args.seed,
                                                           covsel::JackknifePath::downdate);
        for (int n : grid) {
            const double du = curves.uncorrected[0].curve.value_at(n) -
                              curves.uncorrected[1].curve.value_at(n);
            const double dc =
                curves.corrected[0].curve.value_at(n) - curves.corrected[1].curve.value_at(n);
            output.table.add({"criterion-crossing", std::to_string(n), "p1-p2",
                              "mean_diff_uncorrected", fmt(du), "", "", ""});
            output.table.add({"criterion-crossing", std::to_string(n), "p1-p2",
                              "mean_diff_corrected", fmt(dc), "", "", ""});
        }
        auto cross_u =
            covsel::analytic_crossing(curves.uncorrected[0].curve, curves.uncorrected[1].curve);
        auto cross_c =
            covsel::analytic_crossing(curves.corrected[0].curve, curves.corrected[1].curve);
        output.table.add({"criterion-crossing", "", "p1-p2", "crossing_uncorrected",
                          cross_u ? fmt(*cross_u) : "nan", "", "", ""});
        output.table.add({"criterion-crossing", "", "p1-p2", "crossing_corrected",
                          cross_c ? fmt(*cross_c) : "nan", "", "", ""});
    } else if (args.experiment == "selection-single" || args.experiment == "selection-multi") {
        SelectionExperimentConfig cfg;
        cfg.multi_sample = args.experiment == "selection-multi";
        cfg.params = prm;
        cfg.corrected = !args.uncorrected;
        cfg.fresh_coefficients = args.fresh_coefficients;
        cfg.path = covsel::JackknifePath::downdate;
        if (args.rows > 0) cfg.single_sample_rows = args.rows;
        if (!args.n_grid.empty()) {
            cfg.n_grid = args.n_grid;
        } else {
            cfg.n_grid = cfg.multi_sample ? std::vector<int>{40, 100, 150, 250}
                                          : std::vector<int>{30, 60, 90, 120};
        }
        if (cfg.multi_sample) cfg.hyper = hyper_from_config();
        const int reps = args.reps > 0 ? args.reps : (cfg.multi_sample ? 100 : 1000);
        output.meta["reps"] = reps;
        output.meta["corrected"] = cfg.corrected;
        output.meta["fresh_coefficients"] = cfg.fresh_coefficients;
        auto rows = selection_probability_experiment(cfg, reps, args.seed);
        for (const auto& r : rows) {
            output.table.add({args.experiment, std::to_string(r.n), r.model,
                              "selection_frequency", fmt(r.frequency), fmt(r.mc_se),
                              std::to_string(r.reps), ""});
        }
    } else if (args.experiment == "population") {
        if (args.out.empty()) {
            throw CLI::ValidationError("--out", "the population experiment writes a CSV file");
        }
        GeneratedPopulation pop = gen_population(hyper_from_config(), args.seed);
        covsel::io::write_collection_csv(args.out, pop.collection);
        output.meta["datasets"] = pop.collection.size();
        std::ofstream meta_out(args.out + ".meta.json", std::ios::binary);
        meta_out << output.meta.dump(2) << '\n';
        return 0;
    } else {
        throw CLI::ValidationError(
            "--experiment",
            "expected one of prediction-error, criterion-crossing, selection-single, "
            "selection-multi, population");
    }
    output.emit();
    return 0;
}

int run_bootstrap(const BootstrapArgs& args) {
    LoadedData data = load_data(args.data);
    Candidates cands = load_candidates(args.candidates, data.collection.at(0).covariate_names);
    GuardPolicy policy;
    policy.eps_cond = args.data.eps_cond;
    const bool corrected = !args.uncorrected;

    covsel::BootstrapStatistic stat = [&]() {
        if (args.statistic == "level") {
            return covsel::BootstrapStatistic::aggregate(cands.by_label(args.p_label));
        }
        if (args.q_label.empty()) {
            throw CLI::ValidationError("--q", "statistic '" + args.statistic +
                                                  "' needs a second model");
        }
        if (args.statistic == "difference") {
            return covsel::BootstrapStatistic::difference(cands.by_label(args.p_label),
                                                          cands.by_label(args.q_label));
        }
        if (args.statistic == "geno") {
            return covsel::BootstrapStatistic::geno(cands.by_label(args.p_label),
                                                    cands.by_label(args.q_label));
        }
        throw CLI::ValidationError("--statistic", "expected level, difference, or geno");
    }();

    covsel::BootstrapOptions options;
    options.cheap_uncorrected = args.cheap;
    options.dataset_level = args.dataset_level;
    covsel::BootstrapResult res = covsel::bootstrap_sd(data.collection, stat, args.n, args.B,
                                                       corrected, args.seed, policy, options);

    Output output;
    output.out_path = args.out;
    output.wide = args.wide;
    output.meta = meta_base("bootstrap", args.seed);
    attach_data_meta(output.meta, args.data, data);
    output.meta["B"] = args.B;
    output.meta["corrected"] = corrected;
    output.meta["cheap"] = args.cheap;
    output.meta["dataset_level"] = args.dataset_level;
    output.meta["failed_replicates"] = res.failed_replicates;

    const std::string label =
        args.p_label + (args.q_label.empty() ? "" : "," + args.q_label);
    output.table.add({"bootstrap", std::to_string(args.n), label, args.statistic, fmt(res.point),
                      fmt(res.sd), "",
                      res.failed_replicates
                          ? "failed_replicates=" + std::to_string(res.failed_replicates)
                          : ""});
    output.emit();
    return 0;
}

int run_cv(const CvArgs& args) {
    LoadedData data = load_data(args.data);
    Candidates cands = load_candidates(args.candidates, data.collection.at(0).covariate_names);
    GuardPolicy policy;
    policy.eps_cond = args.data.eps_cond;

    covsel::CvResult res = covsel::cv_prediction_error(
        data.collection, cands.by_label(args.p_label), args.n, args.reps, args.seed, policy);

    Output output;
    output.out_path = args.out;
    output.wide = args.wide;
    output.meta = meta_base("cv", args.seed);
    attach_data_meta(output.meta, args.data, data);
    output.meta["reps"] = args.reps;
    output.meta["datasets_used"] = res.datasets_used;
    output.meta["dropped_cells"] = res.dropped_cells;

    output.table.add({"cv", std::to_string(args.n), args.p_label, "cv_prediction_error",
                      fmt(res.estimate), "", std::to_string(res.datasets_used),
                      res.dropped_cells ? "dropped_cells=" + std::to_string(res.dropped_cells)
                                        : ""});
    output.emit();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"common covariate-subset selection across regression datasets"};
    app.require_subcommand(1);
    app.set_version_flag("--cli-version", kVersion);

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "per-dataset least squares and moment summaries");
    add_data_flags(fit, fit_args.data);
    fit->add_option("--candidates", fit_args.candidates, "candidate model JSON file")->required();
    fit->add_option("--out", fit_args.out, "output CSV path (stdout when omitted)");
    fit->add_flag("--wide", fit_args.wide, "also write a wide-format table");

    auto add_correction_flags = [](CLI::App* cmd, bool& uncorrected) {
        cmd->add_flag("--uncorrected", uncorrected, "skip the jackknife correction");
        cmd->add_flag("--corrected", "use the jackknife correction (default)");
    };

    SelectArgs select_args;
    CLI::App* select = app.add_subcommand("select", "choose the best model at one n");
    add_data_flags(select, select_args.data);
    select->add_option("--candidates", select_args.candidates, "candidate model JSON file")
        ->required();
    select->add_option("--n", select_args.n, "prediction sample size")->required();
    add_correction_flags(select, select_args.uncorrected);
    select->add_flag("--strict-mask", select_args.strict_mask,
                     "restrict every candidate to the common usable datasets");
    select->add_option("--seed", select_args.seed, "recorded in metadata");
    select->add_option("--out", select_args.out, "output CSV path (stdout when omitted)");
    select->add_flag("--wide", select_args.wide, "also write a wide-format table");

    SelectArgs curve_args;
    CLI::App* curve = app.add_subcommand("curve", "selection results over an n grid");
    add_data_flags(curve, curve_args.data);
    curve->add_option("--candidates", curve_args.candidates, "candidate model JSON file")
        ->required();
    curve->add_option("--n-grid", curve_args.n_grid, "strictly increasing n values")
        ->required()
        ->delimiter(',');
    add_correction_flags(curve, curve_args.uncorrected);
    curve->add_flag("--strict-mask", curve_args.strict_mask,
                    "restrict every candidate to the common usable datasets");
    curve->add_option("--seed", curve_args.seed, "recorded in metadata");
    curve->add_option("--out", curve_args.out, "output CSV path (stdout when omitted)");
    curve->add_flag("--wide", curve_args.wide, "also write a wide-format table");

    GenoArgs geno_args;
    CLI::App* geno = app.add_subcommand("geno", "equivalent number of observations");
    add_data_flags(geno, geno_args.data);
    geno->get_option("--data")->required(false);
    geno->add_option("--candidates", geno_args.candidates, "candidate model JSON file");
    geno->add_option("--analytic", geno_args.analytic,
                     "'closed-form': use the polynomial benchmark curves instead of data");
    geno->add_option("--params", geno_args.params_file,
                     "JSON overrides for the closed-form parameters (b, a, sigma)");
    geno->add_option("--p", geno_args.p_label, "reference model label")->required();
    geno->add_option("--q", geno_args.q_label, "competitor label (default: all others)");
    geno->add_option("--n", geno_args.n, "prediction sample size")->required();
    add_correction_flags(geno, geno_args.uncorrected);
    geno->add_flag("--min", geno_args.min_only, "report only the minimum over candidates");
    geno->add_option("--seed", geno_args.seed, "recorded in metadata");
    geno->add_option("--out", geno_args.out, "output CSV path (stdout when omitted)");
    geno->add_flag("--wide", geno_args.wide, "also write a wide-format table");

    SimulateArgs sim_args;
    CLI::App* simulate = app.add_subcommand("simulate", "numeric experiments on generated data");
    simulate
        ->add_option("--experiment", sim_args.experiment,
                     "prediction-error | criterion-crossing | selection-single | selection-multi "
                     "| population")
        ->required();
    simulate->add_option("--config", sim_args.config_file, "JSON parameter overrides");
    simulate->add_option("--n-grid", sim_args.n_grid, "n values")->delimiter(',');
    simulate->add_option("--reps", sim_args.reps, "replications");
    simulate->add_option("--rows", sim_args.rows, "rows per generated dataset (single-sample)");
    simulate->add_option("--test-pairs", sim_args.test_pairs,
                         "test pairs per replication (prediction-error)");
    add_correction_flags(simulate, sim_args.uncorrected);
    simulate->add_flag("--fresh-coefficients", sim_args.fresh_coefficients,
                       "redraw dataset coefficients every replication");
    simulate->add_option("--seed", sim_args.seed, "master seed (recorded in metadata)");
    simulate->add_option("--out", sim_args.out, "output CSV path (stdout when omitted)");
    simulate->add_flag("--wide", sim_args.wide, "also write a wide-format table");

    BootstrapArgs boot_args;
    CLI::App* bootstrap = app.add_subcommand("bootstrap", "bootstrap standard deviations");
    add_data_flags(bootstrap, boot_args.data);
    bootstrap->add_option("--candidates", boot_args.candidates, "candidate model JSON file")
        ->required();
    bootstrap->add_option("--statistic", boot_args.statistic, "level | difference | geno");
    bootstrap->add_option("--p", boot_args.p_label, "first model label")->required();
    bootstrap->add_option("--q", boot_args.q_label, "second model label");
    bootstrap->add_option("--n", boot_args.n, "prediction sample size")->required();
    bootstrap->add_option("--B", boot_args.B, "bootstrap replicates (default 200)");
    add_correction_flags(bootstrap, boot_args.uncorrected);
    bootstrap->add_flag("--cheap", boot_args.cheap,
                        "replicate the uncorrected statistic around the corrected point");
    bootstrap->add_flag("--dataset-level", boot_args.dataset_level,
                        "resample whole datasets instead of rows");
    bootstrap->add_option("--seed", boot_args.seed, "master seed (recorded in metadata)");
    bootstrap->add_option("--out", boot_args.out, "output CSV path (stdout when omitted)");
    bootstrap->add_flag("--wide", boot_args.wide, "also write a wide-format table");

    CvArgs cv_args;
    CLI::App* cv = app.add_subcommand("cv", "cross-validation prediction error");
    add_data_flags(cv, cv_args.data);
    cv->add_option("--candidates", cv_args.candidates, "candidate model JSON file")->required();
    cv->add_option("--model,--p", cv_args.p_label, "model label")->required();
    cv->add_option("--n", cv_args.n, "training rows per split")->required();
    cv->add_option("--reps", cv_args.reps, "repetitions per dataset (default 1000)");
    cv->add_option("--seed", cv_args.seed, "master seed (recorded in metadata)");
    cv->add_option("--out", cv_args.out, "output CSV path (stdout when omitted)");
    cv->add_flag("--wide", cv_args.wide, "also write a wide-format table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*fit) return run_fit(fit_args);
        if (*select) return run_select(select_args, false);
        if (*curve) return run_select(curve_args, true);
        if (*geno) return run_geno(geno_args);
        if (*simulate) return run_simulate(sim_args);
        if (*bootstrap) return run_bootstrap(boot_args);
        if (*cv) return run_cv(cv_args);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: usage: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: usage: " << e.what() << '\n';
        return 2;
    } catch (const covsel::TooManySubsets& e) {
        std::cerr << "error: usage: " << e.what() << '\n';
        return 2;
    } catch (const covsel::SingularDesign& e) {
        std::cerr << "error: numerical: " << e.what() << '\n';
        return 4;
    } catch (const covsel::NoUsableDatasets& e) {
        std::cerr << "error: numerical: " << e.what() << '\n';
        return 4;
    } catch (const covsel::DataError& e) {
        std::cerr << "error: data: " << e.what() << '\n';
        return 3;
    } catch (const json::exception& e) {
        std::cerr << "error: data: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
