#include <benchmark/benchmark.h>

#include "ufrkit/data.hpp"
#include "ufrkit/harness.hpp"
#include "ufrkit/interpret.hpp"
#include "ufrkit/ufr.hpp"
#include "ufrkit/yield_forecast.hpp"

using namespace ufrkit;

namespace {

const SynthData& synth() {
    static const SynthData s = [] {
        SynthConfig c;
        c.n_months = 120;
        c.seed = 1;
        return synth_generate(c);
    }();
    return s;
}

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

const char* label(const benchmark::State& state) { return state.range(0) == 0 ? "serial" : "parallel"; }

void BM_ExtractZjw(benchmark::State& state) {
    const auto& s = synth();
    ExtractOptions opt;
    const ZjwKernelCache cache(s.yields.grid, opt.zjw);
    for (auto _ : state) benchmark::DoNotOptimize(extract_series(s.yields, UfrMethod::ZJW, opt, exec_of(state), &cache));
    state.SetLabel(label(state));
}

void BM_LambdaObjective(benchmark::State& state) {
    const auto& s = synth();
    const LambdaObjective objective(s.yields, ExtractOptions{}, exec_of(state));
    for (auto _ : state) benchmark::DoNotOptimize(objective(1.0));
    state.SetLabel(label(state));
}

const ForecastDesign& design() {
    static const ForecastDesign d = build_design(synth().yields, synth().truth.reported(), &synth().macro);
    return d;
}

void BM_RollingForest(benchmark::State& state) {
    RollingConfig rc;
    rc.window_length = 90;
    rc.model.kind = ModelKind::Forest;
    rc.model.forest.trees = 50;
    for (auto _ : state) benchmark::DoNotOptimize(rolling_forecast(design().data, rc, {}, exec_of(state)));
    state.SetLabel(label(state));
}

void BM_RollingMlp(benchmark::State& state) {
    RollingConfig rc;
    rc.window_length = 100;
    rc.model.kind = ModelKind::MLP;
    rc.model.mlp.epochs = 100;
    for (auto _ : state) benchmark::DoNotOptimize(rolling_forecast(design().data, rc, {}, exec_of(state)));
    state.SetLabel(label(state));
}

void BM_ExplainRows(benchmark::State& state) {
    const auto& ds = design().data;
    ModelSpec spec;
    spec.kind = ModelKind::Ridge;
    const auto model = fit_model(spec, ds);
    const Matrix background = ds.x.topRows(32);
    const Matrix rows = ds.x.bottomRows(8);
    ShapleyOptions opt;
    opt.permutations = 128;
    for (auto _ : state) benchmark::DoNotOptimize(explain_rows(*model, background, rows, opt, exec_of(state)));
    state.SetLabel(label(state));
}

void BM_CurveForecasts(benchmark::State& state) {
    const auto& s = synth();
    std::vector<std::size_t> origins;
    for (std::size_t t = 0; t + 1 < s.yields.size(); ++t) origins.push_back(t);
    const std::vector<double> delta(origins.size(), 1e-4);
    const std::vector<double> alphas(s.yields.size(), 0.1);
    for (auto _ : state)
        benchmark::DoNotOptimize(evaluate_curve_forecasts(s.yields, s.truth, origins, delta, alphas, exec_of(state)));
    state.SetLabel(label(state));
}

}  // namespace

BENCHMARK(BM_ExtractZjw)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LambdaObjective)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RollingForest)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RollingMlp)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExplainRows)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CurveForecasts)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
