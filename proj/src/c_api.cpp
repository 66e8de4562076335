#include "ifl/ifl.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <string>

#include "ifl/gaussian.hpp"
#include "ifl/harness.hpp"
#include "ifl/oracle.hpp"
#include "ifl/sampler.hpp"
#include "ifl/test_function.hpp"

struct ifl_kernel {
    ifl::WalkKernel k;
};

struct ifl_potential {
    ifl::Potential v;
};

struct ifl_model {
    ifl::GibbsModel m;
};

struct ifl_oracle {
    ifl::QuadratureOracle o;
};

struct ifl_chain {
    ifl::ChainResult r;
};

namespace {

thread_local std::string last_error;

ifl_status fail(ifl_status s, const std::string& message)
{
    last_error = message;
    return s;
}

/// Runs `body`, mapping library exceptions to status codes.
template <class F>
ifl_status guard(F&& body)
{
    try {
        last_error.clear();
        body();
        return IFL_OK;
    } catch (const ifl::Error& e) {
        return fail(static_cast<ifl_status>(static_cast<int>(e.code())), e.what());
    } catch (const std::bad_alloc&) {
        return fail(IFL_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(IFL_INTERNAL, e.what());
    } catch (...) {
        return fail(IFL_INTERNAL, "unknown exception");
    }
}

void require(bool ok, const char* what)
{
    if (!ok)
        throw ifl::Error(ifl::Errc::invalid_argument, what);
}

void require_quadratic(const ifl_model* model)
{
    if (model->m.potential.kind() != ifl::Potential::Kind::quadratic)
        throw ifl::Error(ifl::Errc::invalid_argument, "exact Gaussian quantities need the quadratic potential");
}

ifl::Field load_field(const ifl::BoxGeometry& geom, const double* values)
{
    ifl::Field f(geom);
    if (values)
        std::copy(values, values + geom.padded_size(), f.values().begin());
    return f;
}

void store_field(const ifl::Field& f, double* out)
{
    std::copy(f.values().begin(), f.values().end(), out);
}

ifl::Field interior_only(const ifl::Field& f)
{
    ifl::Field out(f.geometry());
    for (std::size_t i : f.geometry().interior_sites())
        out[i] = f[i];
    return out;
}

ifl::Field collar_only(const ifl::Field& f)
{
    ifl::Field out(f.geometry());
    for (std::size_t i : f.geometry().collar_sites())
        out[i] = f[i];
    return out;
}

void copy_budget(const ifl::EntropyBudget& b, ifl_budget* out)
{
    *out = {b.interior, b.boundary, b.bound, b.tail_floor, b.curvature, b.amplitude};
}

} // namespace

extern "C" {

const char* ifl_version(void) { return ifl::library_version; }

const char* ifl_status_string(ifl_status status) { return ifl::to_string(static_cast<ifl::Errc>(status)); }

const char* ifl_last_error(void) { return last_error.c_str(); }

ifl_status ifl_kernel_nearest_neighbor(ifl_kernel** out)
{
    return guard([&] {
        require(out, "out is null");
        *out = new ifl_kernel{ifl::WalkKernel::nearest_neighbor()};
    });
}

ifl_status ifl_kernel_create(const ifl_offset* offsets, size_t count, ifl_kernel** out)
{
    return guard([&] {
        require(out && (offsets || count == 0), "null pointer");
        std::vector<ifl::Offset> v;
        for (size_t k = 0; k < count; ++k)
            v.push_back({offsets[k].dx, offsets[k].dy, offsets[k].weight});
        *out = new ifl_kernel{ifl::WalkKernel::validate(std::move(v))};
    });
}

ifl_status ifl_kernel_range(const ifl_kernel* kernel, int* out)
{
    return guard([&] {
        require(kernel && out, "null pointer");
        *out = kernel->k.range();
    });
}

void ifl_kernel_free(ifl_kernel* kernel) { delete kernel; }

ifl_status ifl_potential_quadratic(ifl_potential** out)
{
    return guard([&] {
        require(out, "out is null");
        *out = new ifl_potential{ifl::Potential::quadratic()};
    });
}

ifl_status ifl_potential_anharmonic(double beta, ifl_potential** out)
{
    return guard([&] {
        require(out, "out is null");
        *out = new ifl_potential{ifl::Potential::anharmonic(beta)};
    });
}

ifl_status ifl_potential_value(const ifl_potential* v, double t, double* out)
{
    return guard([&] {
        require(v && out, "null pointer");
        *out = v->v.value(t);
    });
}

ifl_status ifl_potential_curvature(const ifl_potential* v, double* out)
{
    return guard([&] {
        require(v && out, "null pointer");
        *out = v->v.curvature_ceiling();
    });
}

void ifl_potential_free(ifl_potential* v) { delete v; }

ifl_status ifl_model_create(int half_side, const ifl_kernel* kernel, const ifl_potential* v, const double* eta,
                            const double* bc, ifl_model** out)
{
    return guard([&] {
        require(kernel && v && out, "null pointer");
        const ifl::BoxGeometry geom(half_side, kernel->k.range());
        *out = new ifl_model{ifl::GibbsModel(geom, kernel->k, v->v, interior_only(load_field(geom, eta)),
                                             collar_only(load_field(geom, bc)))};
    });
}

void ifl_model_free(ifl_model* model) { delete model; }

size_t ifl_model_padded_size(const ifl_model* model) { return model ? model->m.geometry.padded_size() : 0; }

size_t ifl_model_padded_side(const ifl_model* model)
{
    return model ? static_cast<size_t>(model->m.geometry.padded_side()) : 0;
}

ifl_status ifl_model_index(const ifl_model* model, int x, int y, size_t* out)
{
    return guard([&] {
        require(model && out, "null pointer");
        const auto& g = model->m.geometry;
        if (!g.in_padded(x, y))
            throw ifl::Error(ifl::Errc::invalid_argument, "coordinates outside the padded box");
        *out = g.index(x, y);
    });
}

ifl_status ifl_total_energy(const ifl_model* model, const double* phi, double* out)
{
    return guard([&] {
        require(model && phi && out, "null pointer");
        const auto& m = model->m;
        *out = ifl::total_energy(load_field(m.geometry, phi), m.eta, m.bc, m.kernel, m.potential);
    });
}

ifl_status ifl_local_energy_delta(const ifl_model* model, const double* phi, size_t site, double new_value,
                                  double* out)
{
    return guard([&] {
        require(model && phi && out, "null pointer");
        const auto& m = model->m;
        *out = ifl::local_energy_delta(load_field(m.geometry, phi), site, new_value, m.eta, m.bc, m.kernel,
                                       m.potential);
    });
}

ifl_status ifl_green_column(const ifl_model* model, size_t site, double* out_field)
{
    return guard([&] {
        require(model && out_field, "null pointer");
        const ifl::PrecisionOperator op(model->m.geometry, model->m.kernel);
        store_field(ifl::solve_green_column(op, site), out_field);
    });
}

ifl_status ifl_quenched_mean(const ifl_model* model, double* out_field)
{
    return guard([&] {
        require(model && out_field, "null pointer");
        require_quadratic(model);
        const ifl::PrecisionOperator op(model->m.geometry, model->m.kernel);
        store_field(ifl::quenched_mean(op, model->m.eta, model->m.bc), out_field);
    });
}

ifl_status ifl_groundstate_variance(const ifl_model* model, double* out)
{
    return guard([&] {
        require(model && out, "null pointer");
        const ifl::PrecisionOperator op(model->m.geometry, model->m.kernel);
        *out = ifl::groundstate_variance(op);
    });
}

ifl_status ifl_exact_tail(const ifl_model* model, double radius, double* out)
{
    return guard([&] {
        require(model && out, "null pointer");
        require_quadratic(model);
        const ifl::PrecisionOperator op(model->m.geometry, model->m.kernel);
        *out = ifl::exact_tail(op, model->m.eta, model->m.bc, radius);
    });
}

ifl_status ifl_hitting_probability(const ifl_model* model, double* out_field)
{
    return guard([&] {
        require(model && out_field, "null pointer");
        store_field(ifl::hitting_probability(model->m.geometry, model->m.kernel), out_field);
    });
}

ifl_status ifl_entropy_bound(const ifl_model* model, const double* phibar, ifl_budget* out)
{
    return guard([&] {
        require(model && phibar && out, "null pointer");
        const auto& m = model->m;
        copy_budget(ifl::entropy_bound(load_field(m.geometry, phibar), m.kernel, m.potential.curvature_ceiling()),
                    out);
    });
}

ifl_status ifl_theorem_floor(const ifl_model* model, double level, ifl_budget* out)
{
    return guard([&] {
        require(model && out, "null pointer");
        const auto& m = model->m;
        copy_budget(ifl::theorem_floor(m.geometry, m.kernel, m.potential.curvature_ceiling(), level), out);
    });
}

ifl_status ifl_oracle_create(const ifl_model* model, double cutoff, int points_per_axis, int validate,
                             ifl_oracle** out)
{
    return guard([&] {
        require(model && out, "null pointer");
        ifl::QuadratureSpec spec;
        if (cutoff > 0.0)
            spec.cutoff = cutoff;
        if (points_per_axis > 0)
            spec.points_per_axis = points_per_axis;
        *out = new ifl_oracle{ifl::QuadratureOracle(model->m, spec, validate != 0)};
    });
}

void ifl_oracle_free(ifl_oracle* oracle) { delete oracle; }

ifl_status ifl_oracle_log_partition(const ifl_oracle* oracle, double* out)
{
    return guard([&] {
        require(oracle && out, "null pointer");
        *out = oracle->o.log_partition();
    });
}

ifl_status ifl_oracle_tail(const ifl_oracle* oracle, double radius, double* out)
{
    return guard([&] {
        require(oracle && out, "null pointer");
        *out = oracle->o.tail(radius);
    });
}

ifl_status ifl_oracle_marginal(const ifl_oracle* oracle, const double* edges, size_t n_edges, double* out_masses)
{
    return guard([&] {
        require(oracle && edges && out_masses && n_edges >= 2, "need at least two edges");
        const auto masses = oracle->o.marginal_phi0({edges, n_edges});
        std::copy(masses.begin(), masses.end(), out_masses);
    });
}

ifl_status ifl_oracle_relative_entropy(const ifl_oracle* oracle, const double* phibar, double* out)
{
    return guard([&] {
        require(oracle && phibar && out, "null pointer");
        *out = oracle->o.relative_entropy(load_field(oracle->o.model().geometry, phibar));
    });
}

void ifl_chain_config_default(ifl_chain_config* config)
{
    if (!config)
        return;
    const ifl::ChainConfig d;
    *config = {d.sweeps, d.burn_in, d.proposal_width, d.seed, d.thinning, d.tune_width ? 1 : 0,
               d.target_acceptance};
}

ifl_status ifl_chain_run(const ifl_model* model, const ifl_chain_config* config, ifl_chain** out)
{
    return guard([&] {
        require(model && config && out, "null pointer");
        ifl::ChainConfig c;
        c.sweeps = config->sweeps;
        c.burn_in = config->burn_in;
        c.proposal_width = config->proposal_width;
        c.seed = config->seed;
        c.thinning = config->thinning;
        c.tune_width = config->tune_width != 0;
        c.target_acceptance = config->target_acceptance;
        *out = new ifl_chain{ifl::run_chain(model->m, c)};
    });
}

void ifl_chain_free(ifl_chain* chain) { delete chain; }

size_t ifl_chain_length(const ifl_chain* chain) { return chain ? chain->r.phi0.size() : 0; }

const double* ifl_chain_phi0(const ifl_chain* chain) { return chain ? chain->r.phi0.data() : nullptr; }

double ifl_chain_acceptance(const ifl_chain* chain) { return chain ? chain->r.acceptance_rate : 0.0; }

double ifl_chain_proposal_width(const ifl_chain* chain) { return chain ? chain->r.proposal_width : 0.0; }

ifl_status ifl_tail_estimate(const double* series, size_t n, double radius, ifl_tail* out)
{
    return guard([&] {
        require(out && (series || n == 0), "null pointer");
        const auto e = ifl::tail_estimate({series, n}, radius);
        *out = {e.p_hat, e.ci_low, e.ci_high, e.n_effective, e.tau_int, e.n_samples, e.tau_flagged ? 1 : 0};
    });
}

ifl_status ifl_autocorrelation_time(const double* series, size_t n, double* tau, int* flagged)
{
    return guard([&] {
        require(tau && (series || n == 0), "null pointer");
        const auto a = ifl::autocorrelation_time({series, n});
        *tau = a.tau;
        if (flagged)
            *flagged = a.flagged ? 1 : 0;
    });
}

ifl_status ifl_run_experiment(const char* kind, const char* config_path, const char* out_dir, unsigned threads,
                              int has_seed, uint64_t seed, int* exit_code, char** summary)
{
    return guard([&] {
        require(kind && config_path && exit_code, "null pointer");
        const auto k = ifl::parse_kind(kind);
        if (!k)
            throw ifl::Error(ifl::Errc::invalid_argument, std::string("unknown experiment '") + kind + "'");
        ifl::RunOptions options;
        if (out_dir)
            options.out_dir = out_dir;
        options.threads = threads;
        if (has_seed)
            options.seed = seed;
        const auto report = ifl::run_experiment(*k, ifl::load_config(config_path), options);
        *exit_code = report.exit_code;
        if (summary) {
            std::string text;
            for (const auto& c : report.checks)
                text += c.status + " " + c.name + (c.detail.empty() ? "" : ": " + c.detail) + "\n";
            for (const auto& f : report.files)
                text += "wrote " + f.string() + "\n";
            *summary = static_cast<char*>(std::malloc(text.size() + 1));
            if (!*summary)
                throw std::bad_alloc();
            std::memcpy(*summary, text.c_str(), text.size() + 1);
        }
    });
}

void ifl_string_free(char* s) { std::free(s); }

} // extern "C"
