#include <benchmark/benchmark.h>

#include <string>

#include "avground/grammar.hpp"

namespace {

using namespace avground;

const std::string kAnswer =
    "<answer>\n<when>[10.0,20.5]</when>\n<object> dog </object>\n<where>\n"
    "10.0: [100,200,300,400]\n11.0: [109,280,320,432]\n12.0: [100,200,300,400]\n</where>\n"
    "<object> cat </object>\n<where>\n12.5: [50,60,150,160]\n13.5: [55,62,140,150]\n"
    "</where>\n</answer>\n";

void BM_ParseAnswer(benchmark::State& state) {
    for (auto _ : state) {
        auto parsed = parse_answer(kAnswer, TaskKind::SpatioTemporal);
        benchmark::DoNotOptimize(parsed);
    }
}
BENCHMARK(BM_ParseAnswer);

void BM_CheckFormatMalformed(benchmark::State& state) {
    std::string broken = kAnswer.substr(0, kAnswer.size() / 2);
    for (auto _ : state) {
        bool ok = check_format(broken, TaskKind::SpatioTemporal);
        benchmark::DoNotOptimize(ok);
    }
}
BENCHMARK(BM_CheckFormatMalformed);

void BM_SerializeAnswer(benchmark::State& state) {
    StructuredAnswer answer = std::move(parse_answer(kAnswer, TaskKind::SpatioTemporal)).value();
    for (auto _ : state) {
        std::string text = serialize_answer(answer);
        benchmark::DoNotOptimize(text);
    }
}
BENCHMARK(BM_SerializeAnswer);

}  // namespace
