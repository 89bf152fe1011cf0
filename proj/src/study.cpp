#include "hmm/study.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>

#include "hmm/errors.hpp"

namespace hmm {

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) out.push_back(item);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

ModelSpec make_model(const StudyConfig& cfg) {
    if (cfg.model == "gbf") return make_gbf({cfg.p});
    if (cfg.model == "heat") return make_heat();
    throw ValidationError("unknown model tag '" + cfg.model + "'");
}

} // namespace

void validate(const StudyConfig& cfg) {
    if (cfg.levels.empty()) throw ValidationError("study needs at least one level");
    if (cfg.levels.size() != cfg.dts.size())
        throw ValidationError("levels and dt lists must have the same length");
    for (double dt : cfg.dts)
        if (!(dt > 0.0)) throw ValidationError("all time steps must be positive");
    for (int l : cfg.levels)
        if (l < 1) throw ValidationError("levels start at 1");
    if (!(cfg.T > 0.0)) throw ValidationError("final time must be positive");
    make_model(cfg);  // rejects unknown model tags
}

StudyConfig parse_study_config(std::istream& in) {
    StudyConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected key=value, got '" + line + "'", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "model") {
                cfg.model = val;
            } else if (key == "p") {
                cfg.p = std::stod(val);
            } else if (key == "family") {
                cfg.family = parse_family_tag(val);
            } else if (key == "levels") {
                cfg.levels.clear();
                for (const std::string& s : split_list(val)) cfg.levels.push_back(std::stoi(s));
            } else if (key == "dts") {
                cfg.dts.clear();
                for (const std::string& s : split_list(val)) cfg.dts.push_back(std::stod(s));
            } else if (key == "T") {
                cfg.T = std::stod(val);
            } else if (key == "picard_tol") {
                cfg.solver.picard_tol = std::stod(val);
            } else if (key == "picard_max") {
                cfg.solver.picard_max = std::stoi(val);
            } else if (key == "out_dir") {
                cfg.out_dir = val;
            } else if (key == "formats") {
                cfg.write_csv = cfg.write_md = false;
                for (const std::string& s : split_list(val)) {
                    if (trim(s) == "csv")
                        cfg.write_csv = true;
                    else if (trim(s) == "md")
                        cfg.write_md = true;
                    else
                        throw ValidationError("unknown format '" + trim(s) + "'");
                }
            } else {
                throw ValidationError("unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw ParseError("bad value for '" + key + "'", line_no);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return cfg;
}

StudyResult run_study(const StudyConfig& cfg) {
    validate(cfg);
    StudyResult result;
    result.report.model_tag = cfg.model == "gbf"
                                  ? "gbf(p=" + std::to_string(cfg.p) + ")"
                                  : cfg.model;
    result.report.family_tag = family_tag_name(cfg.family);
    result.report.dt_schedule = cfg.dts;

    const auto flush = [&]() {
        if (cfg.out_dir.empty()) return;
        std::filesystem::create_directories(cfg.out_dir);
        if (cfg.write_csv) {
            std::ofstream f(cfg.out_dir + "/study.csv");
            f << result.report.to_csv();
        }
        if (cfg.write_md) {
            std::ofstream f(cfg.out_dir + "/study.md");
            f << result.report.to_markdown();
        }
    };

    try {
        for (size_t i = 0; i < cfg.levels.size(); ++i) {
            const ModelSpec model = make_model(cfg);
            const PolytopalMesh mesh = generate({cfg.family, cfg.levels[i]});
            const Discretization disc(mesh);

            SolverConfig sc = cfg.solver;
            sc.dt = cfg.dts[i];
            sc.T = cfg.T;
            const Trajectory traj = run(disc, model, sc);

            LevelResult lr;
            lr.level = cfg.levels[i];
            lr.h = mesh.h;
            lr.max_picard_iters = traj.max_picard_iters();
            lr.clamp_events = traj.total_clamp_events();

            ConvergenceRow row;
            row.h = mesh.h;
            if (model.has_exact()) {
                const double T = cfg.T;
                lr.err_c = l2_error_solution(disc, traj.final_state(),
                                             [&](const Vec2& x) { return model.exact(x, T); })
                               .second;
                lr.err_grad =
                    l2_error_gradient(disc, traj.final_state(),
                                      [&](const Vec2& x) { return model.exact_gradient(x, T); })
                        .second;
            }
            row.err_c = lr.err_c;
            row.err_grad = lr.err_grad;
            if (!result.report.rows.empty()) {
                const ConvergenceRow& prev = result.report.rows.back();
                const double dh = std::log(prev.h / row.h);
                if (prev.err_c > 0.0 && row.err_c > 0.0)
                    row.rate_c = std::log(prev.err_c / row.err_c) / dh;
                if (prev.err_grad > 0.0 && row.err_grad > 0.0)
                    row.rate_grad = std::log(prev.err_grad / row.err_grad) / dh;
            }
            result.report.rows.push_back(row);
            result.levels.push_back(lr);
        }
    } catch (...) {
        flush();  // keep partial results on failure
        throw;
    }
    flush();
    return result;
}

} // namespace hmm
