// Compares the serial reference evaluator against the OpenMP-parallel path
// on a scripted workload and checks that the two agree.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "promptforge/evaluate.hpp"

namespace pf = promptforge;

namespace {

pf::ProgramModule make_program() {
    pf::Signature sig = pf::define_signature(
        "classify", "Decide whether the passage matches the target label.",
        {pf::input_field("passage"), pf::output_field("label", pf::ValueKind::Boolean)});
    pf::ProgramModule program;
    program.kind = pf::ModuleKind::Predict;
    program.signature = sig;
    program.params.model = "bench";
    return program;
}

std::vector<pf::Example> make_dataset(size_t count, size_t payload_chars) {
    std::vector<pf::Example> dataset;
    dataset.reserve(count);
    const std::string filler(payload_chars, 'x');
    for (size_t i = 0; i < count; ++i) {
        pf::Example example;
        example.values["passage"] = "case " + std::to_string(i) + " " + filler;
        example.values["label"] = i % 2 == 0 ? "True" : "False";
        example.input_keys.insert("passage");
        dataset.push_back(std::move(example));
    }
    return dataset;
}

double run_timed(int parallelism, const pf::ProgramModule& program,
                 const std::vector<pf::Example>& dataset, const pf::Metric& metric,
                 pf::Backend& backend, double* mean_score) {
    pf::EvalConfig config;
    config.parallelism = parallelism;
    config.repeats = 2;
    const auto start = std::chrono::steady_clock::now();
    pf::EvalResult result = parallelism == 1
                                ? pf::evaluate_serial(program, dataset, metric, config, backend)
                                : pf::evaluate(program, dataset, metric, config, backend);
    const auto stop = std::chrono::steady_clock::now();
    *mean_score = result.mean_score;
    return std::chrono::duration<double>(stop - start).count();
}

}  // namespace

int main(int argc, char** argv) {
    size_t examples = 4000;
    size_t payload = 4096;
    if (argc > 1) examples = std::stoul(argv[1]);
    if (argc > 2) payload = std::stoul(argv[2]);

    const pf::ProgramModule program = make_program();
    const std::vector<pf::Example> dataset = make_dataset(examples, payload);
    const pf::Metric metric = pf::exact_match_metric("label");
    pf::ScriptedBackend backend(
        {{"case ", {"[[ ## label ## ]]\nTrue\n[[ ## completed ## ]]"}, std::nullopt}},
        "[[ ## label ## ]]\nFalse\n[[ ## completed ## ]]");

    std::printf("evaluate benchmark: %zu examples x 2 repeats, %zu-char payloads\n", examples,
                payload);
    std::printf("%-12s %10s %10s %12s\n", "mode", "threads", "seconds", "speedup");

    double serial_mean = 0.0;
    const double serial_seconds = run_timed(1, program, dataset, metric, backend, &serial_mean);
    std::printf("%-12s %10d %10.3f %12s\n", "serial", 1, serial_seconds, "1.00x");

    for (int threads : {2, 4, 8}) {
        double parallel_mean = 0.0;
        const double seconds =
            run_timed(threads, program, dataset, metric, backend, &parallel_mean);
        std::printf("%-12s %10d %10.3f %11.2fx\n", "openmp", threads, seconds,
                    serial_seconds / seconds);
        if (parallel_mean != serial_mean) {
            std::fprintf(stderr, "mean score diverged: %f vs %f\n", parallel_mean, serial_mean);
            return 1;
        }
    }
    return 0;
}
