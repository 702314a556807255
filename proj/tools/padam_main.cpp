// padam: batch CLI over the pipeline. Subcommands: gen-data, train, infer,
// calibrate, evaluate-coverage, select-model. Exit codes: 0 success, 2 usage
// error, 3 data/format error, 4 numerical divergence.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "padam/conformal.hpp"
#include "padam/dataset_io.hpp"
#include "padam/errors.hpp"
#include "padam/lifting.hpp"
#include "padam/metrics.hpp"
#include "padam/mixture_prior.hpp"
#include "padam/model_selection.hpp"
#include "padam/parallel.hpp"
#include "padam/pgm.hpp"
#include "padam/rng.hpp"
#include "padam/run_config.hpp"
#include "padam/tasks.hpp"
#include "padam/testbed.hpp"
#include "padam/trainable_denoiser.hpp"

namespace padam {
namespace {

constexpr std::uint64_t kTestStream = 0x7E57;

struct CommonArgs {
    std::string config_path;
    int jobs = 0; // 0 = default_jobs()
    std::uint64_t seed = 1;

    int effective_jobs() const { return jobs > 0 ? jobs : default_jobs(); }
};

RunConfig load_config(const CommonArgs& c) {
    return c.config_path.empty() ? RunConfig() : RunConfig::from_file(c.config_path);
}

void write_manifest(const std::string& out_path, const RunConfig& cfg, const std::string& command,
                    std::uint64_t seed) {
    std::ofstream m(out_path + ".manifest", std::ios::trunc);
    m << "command=" << command << "\n";
    m << "seed=" << seed << "\n";
    m << "config_hash=" << cfg.hash() << "\n";
    m << cfg.canonical();
}

GeneratorConfig generator_config(const RunConfig& cfg) {
    GeneratorConfig g;
    g.investigation = investigation_from_string(cfg.get("dataset.investigation"));
    g.n_per_class = cfg.get_int("dataset.n_per_class");
    g.solver_nx = cfg.get_int("grid.solver_nx");
    g.prior_nx = cfg.get_int("grid.prior_nx");
    g.cfl = cfg.get_double("solver.cfl");
    g.config_hash = cfg.hash();
    return g;
}

struct Prior {
    Dataset dataset;
    std::unique_ptr<MixtureOraclePrior> oracle;
    std::unique_ptr<TrainableDenoiser> trainable;
    PriorContext ctx;
};

Prior load_prior(const RunConfig& cfg, const std::string& dataset_path) {
    Prior p;
    p.dataset = read_dataset(dataset_path);
    if (p.dataset.samples.empty()) throw FormatError("prior: dataset is empty: " + dataset_path);

    const std::string kind = cfg.get("prior.kind");
    if (kind == "oracle") {
        p.oracle = std::make_unique<MixtureOraclePrior>(p.dataset);
        p.ctx = PriorContext::from_oracle(*p.oracle);
    } else if (kind == "trainable") {
        const std::string ckpt = cfg.get("prior.checkpoint");
        if (ckpt.empty()) throw std::invalid_argument("prior.kind=trainable needs prior.checkpoint");
        p.trainable = TrainableDenoiser::load(ckpt);
        p.ctx.denoiser = p.trainable.get();
        p.ctx.registry = p.dataset.registry;
        p.ctx.norm = p.dataset.norm;
        p.ctx.resolution = p.dataset.grid.nx;
        p.ctx.jacobian = JacobianMode::identity;
    } else {
        throw std::invalid_argument("prior.kind must be oracle or trainable");
    }

    p.ctx.schedule.sigma_min = cfg.get_double("sampler.sigma_min");
    p.ctx.schedule.sigma_max = cfg.get_double("sampler.sigma_max");
    p.ctx.schedule.rho = cfg.get_double("sampler.rho");
    p.ctx.schedule.n_steps = cfg.get_int("sampler.steps");
    p.ctx.zeta_sparse = cfg.get_double("guidance.zeta_sparse");
    p.ctx.zeta_full = cfg.get_double("guidance.zeta_full");
    if (cfg.get("guidance.jacobian") == "identity") p.ctx.jacobian = JacobianMode::identity;
    p.ctx.hard_replace_full = cfg.get_bool("guidance.hard_replace");
    return p;
}

const PDEClass& resolve_class(const ClassRegistry& reg, const std::string& name) {
    if (const PDEClass* c = reg.find(name)) return *c;
    try {
        return reg.by_id(std::stoi(name));
    } catch (const std::exception&) {
        throw std::invalid_argument("unknown class '" + name + "'");
    }
}

void write_rows(const std::string& path, const std::vector<std::string>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open output: " + path);
    out << MetricRecord::csv_header() << "\n";
    for (const auto& r : rows) out << r << "\n";
}

// ---------------------------------------------------------------- gen-data

int cmd_gen_data(const CommonArgs& common, const RunConfig& cfg, const std::string& out) {
    const GeneratorConfig g = generator_config(cfg);
    Dataset ds = generate_dataset(g, common.seed);
    ds.seed = common.seed;
    write_dataset(ds, out);
    write_manifest(out, cfg, "gen-data", common.seed);

    std::printf("investigation=%s samples=%zu grid=%dx%d\n", to_string(g.investigation),
                ds.samples.size(), ds.grid.nx, ds.grid.ny);
    for (const auto& cls : ds.registry.classes) {
        const auto ids = ds.indices_of_class(cls.id);
        double l2 = 0.0;
        for (int i : ids) {
            FieldStats st = field_stats(ds.samples[i].x);
            l2 += st.l2norm;
        }
        std::printf("  class %d %-22s count=%zu mean_l2=%.6g\n", cls.id, cls.name.c_str(),
                    ids.size(), ids.empty() ? 0.0 : l2 / ids.size());
    }
    return 0;
}

// ------------------------------------------------------------------- train

int cmd_train(const CommonArgs& common, const RunConfig& cfg, const std::string& dataset_path,
              const std::string& out) {
    Dataset ds = read_dataset(dataset_path);
    TrainConfig tc;
    tc.steps = cfg.get_long("train.steps");
    tc.batch = cfg.get_int("train.batch");
    tc.lr = cfg.get_double("train.lr");
    tc.hidden = cfg.get_int("train.hidden");
    tc.blocks = cfg.get_int("train.blocks");
    tc.seed = common.seed;

    TrainResult r = train_denoiser(ds, tc);
    std::ostringstream reg_text;
    for (const auto& c : ds.registry.classes) reg_text << c.id << ":" << c.name << ";";
    r.denoiser->save(out, fnv1a_hex(reg_text.str()));
    write_manifest(out, cfg, "train", common.seed);

    const std::size_t w = std::min<std::size_t>(100, r.loss_trace.size());
    double head = 0, tail = 0;
    for (std::size_t i = 0; i < w; ++i) {
        head += r.loss_trace[i] / w;
        tail += r.loss_trace[r.loss_trace.size() - 1 - i] / w;
    }
    std::printf("params=%ld steps=%ld loss_head=%.6g loss_tail=%.6g\n", r.denoiser->param_count(),
                tc.steps, head, tail);
    return 0;
}

// ------------------------------------------------------------------- infer

struct InferArgs {
    std::string task = "forward";
    std::string class_name;
    double fraction = 1.0;
    std::string dataset_path;
    int instances = 20;
    bool held_in = false;
    std::string known; // comma-separated component indices for partial-params
    double adr_k = 0.0;
    std::string dump_images;
    std::string out;
};

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stoi(item));
    return out;
}

int cmd_infer(const CommonArgs& common, const RunConfig& cfg, const InferArgs& a) {
    Prior prior = load_prior(cfg, a.dataset_path);
    const PriorContext& ctx = prior.ctx;
    const std::string hash = cfg.hash();
    const int prec = cfg.get_int("output.precision");
    const int solver_nx = cfg.get_int("grid.solver_nx");
    const double cfl = cfg.get_double("solver.cfl");

    const bool vector_task = a.task == "vector-forward" || a.task == "vector-inverse";
    const PDEClass* cls = nullptr;
    const PDEClass* cls_u = nullptr;
    const PDEClass* cls_v = nullptr;
    if (vector_task) {
        cls_u = &resolve_class(ctx.registry, a.class_name + "_u");
        cls_v = &resolve_class(ctx.registry, a.class_name + "_v");
        cls = cls_u;
    } else {
        cls = &resolve_class(ctx.registry, a.class_name);
    }

    if (!a.dump_images.empty()) std::filesystem::create_directories(a.dump_images);

    std::vector<std::vector<MetricRecord>> per_instance(a.instances);
    auto dump = [&](int i, const char* tag, const Field& f) {
        if (a.dump_images.empty()) return;
        char name[128];
        std::snprintf(name, sizeof(name), "%s/i%03d_%s.pgm", a.dump_images.c_str(), i, tag);
        write_pgm(f, 0, name);
    };

    parallel_for(a.instances, common.effective_jobs(), [&](int i) {
        const std::uint64_t inst_seed = derive_seed(common.seed, kTestStream, i);
        TestInstance inst;
        if (a.task == "ood-joint")
            inst = make_adr_instance(a.adr_k, solver_nx, ctx.resolution, cfl, inst_seed);
        else if (a.held_in)
            inst = held_in_instance(prior.dataset, *cls, i);
        else
            inst = make_test_instance(*cls, solver_nx, ctx.resolution, cfl, inst_seed);

        auto rec = [&](const std::string& metric, const std::string& name, double value) {
            MetricRecord r;
            r.metric = metric;
            r.name = name;
            r.pde_class = cls->name;
            r.task = a.task;
            r.fraction = a.fraction;
            r.value = value;
            r.seed = inst_seed;
            r.config_hash = hash;
            per_instance[i].push_back(std::move(r));
        };
        auto rec_rel = [&](const std::string& name, const Field& pred, const Field& truth) {
            const RelL2Result r = rel_l2(pred, truth);
            rec(r.absolute ? "abs_l2" : "rel_l2", name, r.value);
        };
        char tag[16];
        std::snprintf(tag, sizeof(tag), "i%03d", i);

        if (a.task == "forward") {
            Field pred = forward_predict(ctx, cls->id, inst.phi, inst.u0, a.fraction, inst_seed);
            rec_rel(tag, pred, inst.uT);
            dump(i, "truth", inst.uT);
            dump(i, "pred", pred);
            if (!a.dump_images.empty()) {
                const double fr[3] = {1.0, a.fraction, -1.0};
                ObservationMask m = task_observation_mask(inst.u0.grid, fr, inst_seed);
                char name[128];
                std::snprintf(name, sizeof(name), "%s/i%03d_obs.pgm", a.dump_images.c_str(), i);
                Field u0_3(inst.u0.grid, 3);
                std::copy(inst.u0.channel(0).begin(), inst.u0.channel(0).end(),
                          u0_3.channel(1).begin());
                write_pgm_masked(u0_3, 1, m, name);
            }
        } else if (a.task == "inverse") {
            Field pred = inverse_state(ctx, cls->id, inst.phi, inst.uT, a.fraction, inst_seed);
            rec_rel(tag, pred, inst.u0);
            dump(i, "truth", inst.u0);
            dump(i, "pred", pred);
        } else if (a.task == "infer-params") {
            const std::vector<double> phi_hat =
                infer_params(ctx, cls->id, inst.u0, inst.uT, a.fraction, inst_seed);
            for (std::size_t k = 0; k < phi_hat.size(); ++k)
                rec("phi_rel_err", std::string(tag) + ".phi" + std::to_string(k),
                    100.0 * std::abs(phi_hat[k] - inst.phi[k]) / std::abs(inst.phi[k]));
        } else if (a.task == "partial-params") {
            std::map<int, double> known;
            for (int k : parse_int_list(a.known)) known[k] = inst.phi.at(k);
            const std::map<int, double> rest =
                infer_partial_params(ctx, cls->id, inst.u0, inst.uT, known, a.fraction, inst_seed);
            for (const auto& [k, v] : rest)
                rec("phi_rel_err", std::string(tag) + ".phi" + std::to_string(k),
                    100.0 * std::abs(v - inst.phi[k]) / std::abs(inst.phi[k]));
        } else if (a.task == "vector-forward") {
            auto [uT, vT] =
                vector_forward(ctx, cls_u->id, cls_v->id, inst.u0, inst.v0, a.fraction, inst_seed);
            rec_rel(std::string(tag) + ".uT", uT, inst.uT);
            rec_rel(std::string(tag) + ".vT", vT, inst.vT);
            dump(i, "truth_uT", inst.uT);
            dump(i, "pred_uT", uT);
        } else if (a.task == "vector-inverse") {
            Field u0 = vector_inverse(ctx, cls_u->id, cls_v->id, VectorTarget::u0, inst.uT,
                                      inst.v0, a.fraction, derive_seed(inst_seed, 1));
            Field v0 = vector_inverse(ctx, cls_u->id, cls_v->id, VectorTarget::v0, inst.vT,
                                      inst.u0, a.fraction, derive_seed(inst_seed, 2));
            rec_rel(std::string(tag) + ".u0", u0, inst.u0);
            rec_rel(std::string(tag) + ".v0", v0, inst.v0);
        } else if (a.task == "ood-joint") {
            auto [u0_hat, uT_hat] =
                ood_joint_reconstruct(ctx, cls->id, inst.u0, inst.uT, a.fraction, inst_seed);
            rec_rel(std::string(tag) + ".u0", u0_hat, inst.u0);
            rec_rel(std::string(tag) + ".uT", uT_hat, inst.uT);
        } else {
            throw std::invalid_argument("unknown task '" + a.task + "'");
        }
    });

    std::vector<std::string> rows;
    double sum = 0.0;
    long n = 0;
    for (const auto& group : per_instance)
        for (const auto& r : group) {
            rows.push_back(r.csv_row(prec));
            sum += r.value;
            ++n;
        }
    MetricRecord mean;
    mean.metric = "mean";
    mean.name = "all";
    mean.pde_class = cls->name;
    mean.task = a.task;
    mean.fraction = a.fraction;
    mean.value = n ? sum / n : 0.0;
    mean.seed = common.seed;
    mean.config_hash = hash;
    rows.push_back(mean.csv_row(prec));

    write_rows(a.out, rows);
    write_manifest(a.out, cfg, "infer " + a.task, common.seed);
    std::printf("%s %s fraction=%.3g instances=%d mean=%.4g%%\n", a.task.c_str(),
                cls->name.c_str(), a.fraction, a.instances, mean.value);
    return 0;
}

// --------------------------------------------------- calibrate / coverage

struct CalibArgs {
    std::string dataset_path;
    std::string task = "forward";
    std::string class_name;
    double alpha = -1.0; // defaults from config when < 0
    int members = -1;
    int n_cal = -1;
    double fraction = 0.3;
    std::string out;
};

// Target-channel ensemble for one instance of the forward/inverse task; all
// members condition on the same observation.
std::vector<Field> task_ensemble(const PriorContext& ctx, const PDEClass& cls,
                                 const std::string& task, const TestInstance& inst,
                                 double fraction, int members, std::uint64_t seed) {
    if (task == "forward")
        return forward_predict_ensemble(ctx, cls.id, inst.phi, inst.u0, fraction, members, seed);
    if (task == "inverse")
        return inverse_state_ensemble(ctx, cls.id, inst.phi, inst.uT, fraction, members, seed);
    throw std::invalid_argument("calibrate: task must be forward or inverse");
}

int cmd_calibrate(const CommonArgs& common, const RunConfig& cfg, const CalibArgs& a) {
    Prior prior = load_prior(cfg, a.dataset_path);
    const PriorContext& ctx = prior.ctx;
    const PDEClass& cls = resolve_class(ctx.registry, a.class_name);
    const double alpha = a.alpha > 0 ? a.alpha : cfg.get_double("conformal.alpha");
    const int members = a.members > 0 ? a.members : cfg.get_int("conformal.members");
    const int n_cal = a.n_cal > 0 ? a.n_cal : cfg.get_int("conformal.n_cal");
    if (n_cal < 1) throw std::invalid_argument("calibrate: n_cal must be >= 1");
    const int solver_nx = cfg.get_int("grid.solver_nx");
    const double cfl = cfg.get_double("solver.cfl");
    const int target_ch = a.task == "forward" ? 2 : 1;
    const double floor =
        cfg.get_double("conformal.sigma_floor_rel") * ctx.norm.s(cls.id, target_ch);

    std::vector<std::vector<double>> per_instance(n_cal);
    parallel_for(n_cal, common.effective_jobs(), [&](int i) {
        const std::uint64_t s = derive_seed(common.seed, 0xCA1, i);
        TestInstance inst = make_test_instance(cls, solver_nx, ctx.resolution, cfl, s);
        const std::vector<Field> ens =
            task_ensemble(ctx, cls, a.task, inst, a.fraction, members, s);
        const EnsembleStats st = ensemble_stats(ens);
        const Field& truth = a.task == "forward" ? inst.uT : inst.u0;
        const Field scores = nonconformity(truth, st, floor);
        per_instance[i] = scores.data;
    });

    std::vector<double> pooled;
    for (const auto& v : per_instance) pooled.insert(pooled.end(), v.begin(), v.end());

    CalibrationRecord rec;
    rec.class_id = cls.id;
    rec.task = a.task;
    rec.alpha = alpha;
    rec.n_pool = static_cast<long>(pooled.size());
    rec.n_instances = n_cal;
    rec.members = members;
    rec.fraction = a.fraction;
    rec.q_hat = calibrate(pooled, alpha);
    rec.sigma_floor = floor;
    rec.score_digest = score_digest(pooled);
    rec.config_hash = cfg.hash();
    rec.seed = common.seed;
    rec.save(a.out);
    write_manifest(a.out, cfg, "calibrate", common.seed);
    std::printf("calibrate %s %s alpha=%.3g M=%d n_cal=%d q_hat=%.6g\n", cls.name.c_str(),
                a.task.c_str(), alpha, members, n_cal, rec.q_hat);
    return 0;
}

struct CoverageArgs {
    std::string dataset_path;
    std::string record_path;
    int instances = 50;
    std::string out;
};

int cmd_evaluate_coverage(const CommonArgs& common, const RunConfig& cfg, const CoverageArgs& a) {
    Prior prior = load_prior(cfg, a.dataset_path);
    const PriorContext& ctx = prior.ctx;
    const CalibrationRecord rec = CalibrationRecord::load(a.record_path);
    const PDEClass& cls = ctx.registry.by_id(rec.class_id);
    const int solver_nx = cfg.get_int("grid.solver_nx");
    const double cfl = cfg.get_double("solver.cfl");
    const std::string hash = cfg.hash();
    const int prec = cfg.get_int("output.precision");

    std::vector<std::array<double, 2>> picps(a.instances);
    parallel_for(a.instances, common.effective_jobs(), [&](int i) {
        const std::uint64_t s = derive_seed(common.seed, 0xC0F, i);
        TestInstance inst = make_test_instance(cls, solver_nx, ctx.resolution, cfl, s);
        const std::vector<Field> ens =
            task_ensemble(ctx, cls, rec.task, inst, rec.fraction, rec.members, s);
        const EnsembleStats st = ensemble_stats(ens);
        const Field& truth = rec.task == "forward" ? inst.uT : inst.u0;

        // Raw Gaussian baseline: mu +/- 1.96 sigma without any floor.
        Field lo = st.mean, hi = st.mean;
        for (std::size_t k = 0; k < lo.data.size(); ++k) {
            lo.data[k] -= 1.96 * st.stdev.data[k];
            hi.data[k] += 1.96 * st.stdev.data[k];
        }
        picps[i][0] = picp(truth, lo, hi);

        auto [clo, chi] = conformal_interval(st, rec.q_hat, rec.sigma_floor);
        picps[i][1] = picp(truth, clo, chi);
    });

    std::vector<std::string> rows;
    double mean_raw = 0, mean_cal = 0;
    for (int i = 0; i < a.instances; ++i) {
        char tag[16];
        std::snprintf(tag, sizeof(tag), "i%03d", i);
        for (int which = 0; which < 2; ++which) {
            MetricRecord r;
            r.metric = which == 0 ? "picp_raw" : "picp_calibrated";
            r.name = tag;
            r.pde_class = cls.name;
            r.task = rec.task;
            r.fraction = rec.fraction;
            r.value = picps[i][which];
            r.seed = derive_seed(common.seed, 0xC0F, i);
            r.config_hash = hash;
            rows.push_back(r.csv_row(prec));
        }
        mean_raw += picps[i][0] / a.instances;
        mean_cal += picps[i][1] / a.instances;
    }
    for (int which = 0; which < 2; ++which) {
        MetricRecord r;
        r.metric = which == 0 ? "mean_picp_raw" : "mean_picp_calibrated";
        r.name = "mean";
        r.pde_class = cls.name;
        r.task = rec.task;
        r.fraction = rec.fraction;
        r.value = which == 0 ? mean_raw : mean_cal;
        r.seed = common.seed;
        r.config_hash = hash;
        rows.push_back(r.csv_row(prec));
    }
    write_rows(a.out, rows);
    write_manifest(a.out, cfg, "evaluate-coverage", common.seed);
    std::printf("coverage %s %s raw=%.2f%% calibrated=%.2f%% (alpha=%.3g)\n", cls.name.c_str(),
                rec.task.c_str(), mean_raw, mean_cal, rec.alpha);
    return 0;
}

// ------------------------------------------------------------ select-model

struct SelectArgs {
    std::string dataset_path;
    std::string candidates; // comma names/ids; empty = all with d_c >= 1
    std::string true_class;
    double fraction = 0.3;
    int repeats = -1;
    int instances = 1;
    std::string out;
};

int cmd_select_model(const CommonArgs& common, const RunConfig& cfg, const SelectArgs& a) {
    Prior prior = load_prior(cfg, a.dataset_path);
    const PriorContext& ctx = prior.ctx;
    const int repeats = a.repeats > 0 ? a.repeats : cfg.get_int("selection.repeats");
    const int solver_nx = cfg.get_int("grid.solver_nx");
    const double cfl = cfg.get_double("solver.cfl");
    const std::string hash = cfg.hash();
    const int prec = cfg.get_int("output.precision");

    std::vector<int> candidate_ids;
    if (a.candidates.empty()) {
        for (const auto& c : ctx.registry.classes)
            if (c.param_dim >= 1 && !c.vector_family) candidate_ids.push_back(c.id);
    } else {
        std::stringstream ss(a.candidates);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) candidate_ids.push_back(resolve_class(ctx.registry, item).id);
    }
    if (candidate_ids.empty()) throw std::invalid_argument("select-model: no candidates");
    if (candidate_ids.size() == 1)
        std::fprintf(stderr, "warning: single-candidate library; selection is trivial\n");

    const PDEClass& truth = resolve_class(ctx.registry, a.true_class);
    std::vector<std::string> rows;
    int correct = 0;

    for (int inst_i = 0; inst_i < a.instances; ++inst_i) {
        const std::uint64_t s = derive_seed(common.seed, 0x5E1, inst_i);
        TestInstance inst = make_test_instance(truth, solver_nx, ctx.resolution, cfl, s);
        SnapshotObservation snap = make_snapshots(inst.u0, inst.uT, a.fraction, s);
        SelectionResult res = select_model(ctx, candidate_ids, snap, repeats, derive_seed(s, 7));

        for (std::size_t k = 0; k < res.representative.size(); ++k) {
            const CandidateScore& cs = res.representative[k];
            MetricRecord r;
            r.metric = "selection_discrepancy";
            char tag[32];
            std::snprintf(tag, sizeof(tag), "i%03d", inst_i);
            r.name = tag;
            r.pde_class = ctx.registry.by_id(cs.class_id).name;
            r.task = "select";
            r.fraction = a.fraction;
            r.value = cs.discrepancy;
            r.seed = s;
            r.config_hash = hash;
            rows.push_back(r.csv_row(prec));
        }
        MetricRecord r;
        r.metric = "selected_class";
        char tag[32];
        std::snprintf(tag, sizeof(tag), "i%03d", inst_i);
        r.name = tag;
        r.pde_class = ctx.registry.by_id(res.selected_class).name;
        r.task = "select";
        r.fraction = a.fraction;
        r.value = res.selected_class;
        r.seed = s;
        r.config_hash = hash;
        rows.push_back(r.csv_row(prec));

        if (res.selected_class == truth.id) ++correct;
        std::printf("--- instance %d ---\n%s", inst_i,
                    selection_summary(ctx, res, &truth, inst.phi).c_str());
    }

    MetricRecord acc;
    acc.metric = "selection_accuracy";
    acc.name = "all";
    acc.pde_class = truth.name;
    acc.task = "select";
    acc.fraction = a.fraction;
    acc.value = 100.0 * correct / std::max(1, a.instances);
    acc.seed = common.seed;
    acc.config_hash = hash;
    rows.push_back(acc.csv_row(prec));

    write_rows(a.out, rows);
    write_manifest(a.out, cfg, "select-model", common.seed);
    std::printf("accuracy=%.1f%% over %d instance(s)\n", acc.value, a.instances);
    return 0;
}

} // namespace
} // namespace padam

int main(int argc, char** argv) {
    using namespace padam;

    CLI::App app{"pADAM pipeline: datasets, priors, guided inference, calibration, selection"};
    app.require_subcommand(1);
    app.fallthrough();

    CommonArgs common;
    app.add_option("--config", common.config_path, "run configuration file (INI)");
    app.add_option("--jobs", common.jobs, "worker threads (default: PADAM_JOBS or hardware)");
    app.add_option("--seed", common.seed, "root seed; all randomness derives from it");

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a PDE dataset (PADM container)");
    std::string gen_investigation, gen_out;
    int gen_n = -1, gen_solver_nx = -1, gen_prior_nx = -1;
    gen->add_option("--investigation", gen_investigation,
                    "unified | continuous_manifold | structural | parametric");
    gen->add_option("--n-per-class", gen_n, "samples per class");
    gen->add_option("--solver-nx", gen_solver_nx, "solver resolution");
    gen->add_option("--prior-nx", gen_prior_nx, "stored (prior) resolution");
    gen->add_option("--out", gen_out, "output dataset path")->required();

    // train
    auto* tr = app.add_subcommand("train", "train the denoiser on a dataset");
    std::string tr_dataset, tr_out;
    long tr_steps = -1;
    int tr_batch = -1;
    double tr_lr = -1;
    tr->add_option("--dataset", tr_dataset, "training dataset (PADM)")->required();
    tr->add_option("--steps", tr_steps, "optimization steps");
    tr->add_option("--batch", tr_batch, "batch size");
    tr->add_option("--lr", tr_lr, "learning rate");
    tr->add_option("--out", tr_out, "checkpoint path")->required();

    // infer
    auto* inf = app.add_subcommand("infer", "run an inference task and emit metric CSV");
    InferArgs ia;
    inf->add_option("--task", ia.task,
                    "forward | inverse | infer-params | partial-params | vector-forward | "
                    "vector-inverse | ood-joint")
        ->required();
    inf->add_option("--class", ia.class_name, "PDE class (name or id; family name for vector tasks)")
        ->required();
    inf->add_option("--fraction", ia.fraction, "observation fraction per observed channel");
    inf->add_option("--dataset", ia.dataset_path, "prior dataset (PADM)")->required();
    inf->add_option("--instances", ia.instances, "test instances");
    inf->add_flag("--held-in", ia.held_in, "evaluate on training samples instead of fresh draws");
    inf->add_option("--known", ia.known, "known phi component indices (partial-params)");
    inf->add_option("--adr-k", ia.adr_k, "reaction rate k for ood-joint");
    inf->add_option("--dump-images", ia.dump_images, "directory for PGM triptychs");
    inf->add_option("--out", ia.out, "output CSV path")->required();

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "split-conformal calibration for a (class, task)");
    CalibArgs ca;
    cal->add_option("--dataset", ca.dataset_path, "prior dataset (PADM)")->required();
    cal->add_option("--task", ca.task, "forward | inverse");
    cal->add_option("--class", ca.class_name, "PDE class")->required();
    cal->add_option("--alpha", ca.alpha, "miscoverage rate");
    cal->add_option("--M", ca.members, "ensemble size");
    cal->add_option("--n-cal", ca.n_cal, "calibration instances");
    cal->add_option("--fraction", ca.fraction, "observation fraction");
    cal->add_option("--out", ca.out, "calibration record path")->required();

    // evaluate-coverage
    auto* cov = app.add_subcommand("evaluate-coverage", "PICP of raw vs calibrated intervals");
    CoverageArgs va;
    cov->add_option("--dataset", va.dataset_path, "prior dataset (PADM)")->required();
    cov->add_option("--record", va.record_path, "calibration record")->required();
    cov->add_option("--instances", va.instances, "test instances");
    cov->add_option("--out", va.out, "output CSV path")->required();

    // select-model
    auto* sel = app.add_subcommand("select-model", "two-snapshot PDE model selection");
    SelectArgs sa;
    sel->add_option("--dataset", sa.dataset_path, "prior dataset (PADM)")->required();
    sel->add_option("--candidates", sa.candidates, "candidate classes (comma list; default all)");
    sel->add_option("--true-class", sa.true_class, "ground-truth class for the test instances")
        ->required();
    sel->add_option("--fraction", sa.fraction, "observation fraction");
    sel->add_option("--repeats", sa.repeats, "ensemble repeats R");
    sel->add_option("--instances", sa.instances, "independent trials");
    sel->add_option("--out", sa.out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = load_config(common);
        if (gen->parsed()) {
            if (!gen_investigation.empty()) cfg.set("dataset.investigation", gen_investigation);
            if (gen_n == 0) throw std::invalid_argument("gen-data: n-per-class must be positive");
            if (gen_n > 0) cfg.set("dataset.n_per_class", std::to_string(gen_n));
            if (gen_solver_nx > 0) cfg.set("grid.solver_nx", std::to_string(gen_solver_nx));
            if (gen_prior_nx > 0) cfg.set("grid.prior_nx", std::to_string(gen_prior_nx));
            return cmd_gen_data(common, cfg, gen_out);
        }
        if (tr->parsed()) {
            if (tr_steps > 0) cfg.set("train.steps", std::to_string(tr_steps));
            if (tr_batch > 0) cfg.set("train.batch", std::to_string(tr_batch));
            if (tr_lr > 0) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.17g", tr_lr);
                cfg.set("train.lr", buf);
            }
            return cmd_train(common, cfg, tr_dataset, tr_out);
        }
        if (inf->parsed()) return cmd_infer(common, cfg, ia);
        if (cal->parsed()) return cmd_calibrate(common, cfg, ca);
        if (cov->parsed()) return cmd_evaluate_coverage(common, cfg, va);
        if (sel->parsed()) return cmd_select_model(common, cfg, sa);
        return 2;
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "error (divergence): %s\n", e.what());
        return 4;
    } catch (const FormatError& e) {
        std::fprintf(stderr, "error (format): %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error (usage): %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
