// Command-line front end: mesh generation, single runs, convergence studies
// and discretisation quality reports.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "hmm/errors.hpp"
#include "hmm/mesh_io.hpp"
#include "hmm/metrics.hpp"
#include "hmm/solver.hpp"
#include "hmm/study.hpp"

namespace {

using namespace hmm;

// Streams to `path`, with "-" meaning stdout.
class OutStream {
public:
    explicit OutStream(const std::string& path) {
        if (path != "-") {
            file_.open(path);
            if (!file_) throw ValidationError("cannot open output file '" + path + "'");
        }
    }
    std::ostream& get() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

struct MeshArgs {
    std::string family = "triangular";
    int level = 1;
    std::string mesh_file;  // when set, wins over family/level
};

PolytopalMesh load_mesh(const MeshArgs& a) {
    if (!a.mesh_file.empty()) return read_mesh_file(a.mesh_file);
    return generate({parse_family_tag(a.family), a.level});
}

ModelSpec load_model(const std::string& tag, double p) {
    if (tag == "gbf") return make_gbf({p});
    if (tag == "heat") return make_heat();
    throw ValidationError("unknown model '" + tag + "' (expected gbf or heat)");
}

int cmd_mesh(const MeshArgs& margs, const std::string& out, bool dump_matrices) {
    const PolytopalMesh mesh = load_mesh(margs);
    if (!out.empty()) {
        OutStream os(out);
        write_mesh(mesh, os.get());
    }
    std::cout << "h=" << mesh.h << " cells=" << mesh.n_cells() << " faces=" << mesh.n_faces()
              << "\n";
    if (dump_matrices) {
        const Discretization disc(mesh);
        std::cout.precision(17);
        for (int c = 0; c < disc.n_cells(); ++c)
            std::cout << "cell " << c << "\n" << disc.local_diffusion_matrix(c) << "\n";
    }
    return 0;
}

int cmd_run(const MeshArgs& margs, const std::string& model_tag, double p, double dt, double T,
            const std::string& out) {
    const PolytopalMesh mesh = load_mesh(margs);
    const Discretization disc(mesh);
    const ModelSpec model = load_model(model_tag, p);
    SolverConfig cfg;
    cfg.dt = dt;
    cfg.T = T;
    const Trajectory traj = run(disc, model, cfg);
    if (!out.empty()) {
        OutStream os(out);
        export_trajectory_csv(traj, dt, os.get());
    }
    if (model.has_exact()) {
        const auto [abs_c, rel_c] = l2_error_solution(
            disc, traj.final_state(), [&](const Vec2& x) { return model.exact(x, T); });
        const auto [abs_g, rel_g] = l2_error_gradient(
            disc, traj.final_state(), [&](const Vec2& x) { return model.exact_gradient(x, T); });
        std::cout << "h=" << mesh.h << " rel_err_c=" << rel_c << " rel_err_grad=" << rel_g
                  << " abs_err_c=" << abs_c << " abs_err_grad=" << abs_g << "\n";
    }
    std::cout << "steps=" << traj.steps.size() << " max_picard=" << traj.max_picard_iters()
              << " clamp_events=" << traj.total_clamp_events() << "\n";
    return 0;
}

int cmd_study(StudyConfig cfg) {
    const StudyResult res = run_study(cfg);
    std::cout << res.report.to_markdown();
    return 0;
}

int cmd_quality(const MeshArgs& margs, double dt, unsigned seed, bool check_poincare) {
    const PolytopalMesh mesh = load_mesh(margs);
    const Discretization disc(mesh);
    const QualityReport q = quality_report(disc);
    std::cout << "h,C_D,S_D_sine_bubble,W_D_curl_bubble\n";
    std::cout << q.h << "," << q.coercivity << "," << q.consistency.at("sine_bubble") << ","
              << q.conformity.at("curl_bubble") << "\n";
    if (dt > 0.0) {
        const double bound = 2.0 / (q.coercivity + 1e-3);  // lambda = 1
        if (dt >= bound)
            std::cout << "warning: dt = " << dt << " >= 2*lambda/(C_D + eps) = " << bound
                      << "\n";
    }
    if (check_poincare) {
        std::mt19937 rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<char> on_boundary(disc.n_dofs(), 0);
        for (int f : disc.boundary_faces()) on_boundary[disc.face_dof(f)] = 1;
        for (int trial = 0; trial < 100; ++trial) {
            DofVector u(disc.n_dofs());
            for (int d = 0; d < disc.n_dofs(); ++d) u[d] = on_boundary[d] ? 0.0 : gauss(rng);
            if (disc.reconstruction_norm(u) >
                (q.coercivity + 1e-8) * disc.gradient_norm(u)) {
                std::cout << "poincare_check=FAILED\n";
                return 1;
            }
        }
        std::cout << "poincare_check=ok\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid mimetic mixed solver for convection-diffusion-reaction problems"};
    app.require_subcommand(1);

    MeshArgs margs;
    std::string out;
    std::string model_tag = "gbf";
    double p = 2.0, dt = 0.01, T = 1.0;
    bool dump_matrices = false;
    unsigned seed = 0;
    bool check_poincare = false;

    auto add_mesh_flags = [&](CLI::App* c) {
        c->add_option("--family", margs.family, "mesh family: triangular|hexagonal|distorted|nonconforming");
        c->add_option("--level", margs.level, "refinement level (>= 1)");
        c->add_option("--mesh", margs.mesh_file, "read the mesh from a file instead");
    };

    CLI::App* mesh_cmd = app.add_subcommand("mesh", "generate a mesh and print its stats");
    add_mesh_flags(mesh_cmd);
    mesh_cmd->add_option("--out", out, "mesh file to write ('-' for stdout)");
    mesh_cmd->add_flag("--dump-local-matrices", dump_matrices,
                       "also print each cell's local diffusion matrix");

    CLI::App* run_cmd = app.add_subcommand("run", "run one simulation");
    add_mesh_flags(run_cmd);
    run_cmd->add_option("--model", model_tag, "gbf|heat");
    run_cmd->add_option("--p", p, "GBF exponent");
    run_cmd->add_option("--dt", dt, "time step");
    run_cmd->add_option("--T", T, "final time");
    run_cmd->add_option("--out", out, "trajectory CSV ('-' for stdout)");

    CLI::App* study_cmd = app.add_subcommand("study", "run a convergence study");
    std::string config_file, levels_csv, dts_csv, formats = "csv,md";
    std::string study_family, study_out;
    double study_p = -1.0, study_T = -1.0;
    std::string study_model;
    study_cmd->add_option("--config", config_file, "key=value config file");
    study_cmd->add_option("--model", study_model, "gbf|heat");
    study_cmd->add_option("--p", study_p, "GBF exponent");
    study_cmd->add_option("--family", study_family, "mesh family");
    study_cmd->add_option("--levels", levels_csv, "comma-separated levels");
    study_cmd->add_option("--dts", dts_csv, "comma-separated time steps, one per level");
    study_cmd->add_option("--T", study_T, "final time");
    study_cmd->add_option("--out", study_out, "output directory");
    study_cmd->add_option("--format", formats, "csv,md subset");

    CLI::App* quality_cmd = app.add_subcommand("quality", "discretisation quality report");
    add_mesh_flags(quality_cmd);
    double quality_dt = 0.0;
    quality_cmd->add_option("--dt", quality_dt, "check the contraction step bound for this dt");
    quality_cmd->add_option("--seed", seed, "seed for the random Poincare spot check");
    quality_cmd->add_flag("--check-poincare", check_poincare,
                          "verify the discrete Poincare inequality on random vectors");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage errors -> 2, --help -> 0
    }

    try {
        if (mesh_cmd->parsed()) return cmd_mesh(margs, out, dump_matrices);
        if (run_cmd->parsed()) return cmd_run(margs, model_tag, p, dt, T, out);
        if (quality_cmd->parsed()) return cmd_quality(margs, quality_dt, seed, check_poincare);
        // study: config file first, flags win
        StudyConfig cfg;
        if (!config_file.empty()) {
            std::ifstream f(config_file);
            if (!f) throw ValidationError("cannot open config file '" + config_file + "'");
            cfg = hmm::parse_study_config(f);
        }
        if (!study_model.empty()) cfg.model = study_model;
        if (study_p > 0.0) cfg.p = study_p;
        if (!study_family.empty()) cfg.family = parse_family_tag(study_family);
        if (!levels_csv.empty()) {
            std::istringstream is(levels_csv);
            cfg.levels.clear();
            for (std::string s; std::getline(is, s, ',');) cfg.levels.push_back(std::stoi(s));
        }
        if (!dts_csv.empty()) {
            std::istringstream is(dts_csv);
            cfg.dts.clear();
            for (std::string s; std::getline(is, s, ',');) cfg.dts.push_back(std::stod(s));
        }
        if (study_T > 0.0) cfg.T = study_T;
        if (!study_out.empty()) cfg.out_dir = study_out;
        if (formats != "csv,md") {
            cfg.write_csv = formats.find("csv") != std::string::npos;
            cfg.write_md = formats.find("md") != std::string::npos;
        }
        return cmd_study(std::move(cfg));
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cerr << app.help() << "\n";
        return 2;
    } catch (const PicardDiverged& e) {
        std::cerr << "error: " << e.what() << " (step " << e.step << ")\n";
        return 1;
    } catch (const hmm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
