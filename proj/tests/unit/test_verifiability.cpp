#include <gtest/gtest.h>

#include <algorithm>

#include "crossling/common/error.hpp"
#include "crossling/common/random.hpp"
#include "crossling/llmgate/providers.hpp"
#include "crossling/verifiability/verifiability.hpp"

using namespace crossling;
using namespace crossling::verifiability;
using Rule = llm::MockChatProvider::Rule;

namespace {

std::vector<VerifiabilityOutcome> from_confusion(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
    std::vector<VerifiabilityOutcome> out;
    auto add = [&](std::size_t n, bool truth, bool pred) {
        for (std::size_t i = 0; i < n; ++i) {
            VerifiabilityOutcome o;
            o.instance_id = std::to_string(out.size());
            o.truth = truth;
            o.predicted = pred;
            out.push_back(o);
        }
    };
    add(tp, true, true);
    add(fp, false, true);
    add(tn, false, false);
    add(fn, true, false);
    return out;
}

corpus::VerifiabilityInstance instance(const std::string& id, const std::string& answer, bool positive,
                                       const std::string& lang = "en") {
    corpus::VerifiabilityInstance inst;
    inst.instance_id = id;
    inst.question = {id.substr(0, id.find('#')), corpus::DatasetName::HealthQA, lang, "Is aspirin an NSAID?",
                     "Yes, aspirin is an NSAID.", corpus::Polarity::Positive};
    inst.answer = answer;
    inst.label = positive ? corpus::Polarity::Positive : corpus::Polarity::Negative;
    return inst;
}

std::vector<corpus::VerifiabilityInstance> instances() {
    return {instance("q1#0", "GOOD answer one", true), instance("q1#1", "BAD answer one", false),
            instance("q2#0", "GOOD answer two", true), instance("q2#1", "BAD answer two", false),
            instance("q2#2", "BAD answer three", false)};
}

llm::Gateway gateway_for(std::vector<Rule> rules) {
    return llm::Gateway(std::make_shared<llm::MockChatProvider>(std::move(rules)), nullptr,
                        llm::GatewayConfig{.retry = llm::RetryPolicy::immediate(0)});
}

}  // namespace

TEST(ClassificationMetrics, ConfusionMatrixExample) {
    const auto r = classification_metrics(from_confusion(8, 1, 9, 1));
    EXPECT_NEAR(r.precision_macro, 0.5 * (8.0 / 9 + 9.0 / 10), 1e-12);
    EXPECT_NEAR(r.recall_macro, 0.5 * (8.0 / 9 + 9.0 / 10), 1e-12);
    EXPECT_NEAR(r.precision_macro, 0.894444, 1e-6);
    EXPECT_NEAR(r.accuracy, 17.0 / 19, 1e-12);
    EXPECT_NEAR(r.f1_macro, r.precision_macro, 1e-12);
    ASSERT_TRUE(r.auc.has_value());
    EXPECT_DOUBLE_EQ(*r.auc, r.recall_macro);
    EXPECT_EQ(r.total(), 19u);
}

TEST(ClassificationMetrics, PerfectAndInverted) {
    const auto perfect = classification_metrics(from_confusion(5, 0, 7, 0));
    for (const auto& m : report_metric_names()) EXPECT_DOUBLE_EQ(*report_metric(perfect, m), 1.0) << m;
    const auto inverted = classification_metrics(from_confusion(0, 7, 0, 5));
    EXPECT_DOUBLE_EQ(inverted.accuracy, 0.0);
    EXPECT_DOUBLE_EQ(inverted.recall_macro, 0.0);
    EXPECT_DOUBLE_EQ(inverted.f1_macro, 0.0);
    EXPECT_DOUBLE_EQ(*inverted.auc, 0.0);
}

TEST(ClassificationMetrics, SingleClassHasNoAuc) {
    const auto r = classification_metrics(from_confusion(3, 0, 0, 2));
    EXPECT_FALSE(r.auc.has_value());
    EXPECT_DOUBLE_EQ(r.accuracy, 0.6);
    EXPECT_THROW(classification_metrics({}), Error);
    try {
        rank_auc({1.0, 0.0}, {true, true});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SingleClass);
    }
}

TEST(ClassificationMetrics, AucEqualsMacroRecallOnRandomConfusions) {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const auto tp = rng.uniform_index(30), fp = rng.uniform_index(30);
        const auto tn = 1 + rng.uniform_index(30), fn = 1 + rng.uniform_index(30);
        auto outcomes = from_confusion(tp, fp, tn, fn);
        const auto r = classification_metrics(outcomes);
        EXPECT_NEAR(*r.auc, r.recall_macro, 1e-12);
        EXPECT_DOUBLE_EQ(r.accuracy, static_cast<double>(tp + tn) / (tp + fp + tn + fn));
        rng.shuffle(std::span(outcomes));
        const auto shuffled = classification_metrics(outcomes);
        EXPECT_EQ(shuffled.auc, r.auc);
        EXPECT_EQ(shuffled.f1_macro, r.f1_macro);
    }
}

TEST(ClassificationMetrics, RankAucMatchesBruteForce) {
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(199);
        std::vector<double> scores(n);
        std::vector<bool> truth(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = static_cast<double>(rng.uniform_index(7));  // plenty of ties
            truth[i] = rng.uniform() < 0.4;
        }
        truth[0] = true;
        truth[1] = false;
        EXPECT_DOUBLE_EQ(rank_auc(scores, truth), pairwise_auc(scores, truth));
    }
    EXPECT_DOUBLE_EQ(rank_auc({0.1, 0.4, 0.35, 0.8}, {false, false, true, true}), 0.75);
    EXPECT_THROW(rank_auc({0.1}, {true, false}), Error);
}

TEST(Judge, MapsVerdictsToPredictions) {
    auto gw = gateway_for({{"GOOD", {"Yes."}}, {"BAD", {"No."}}, {"odd", {"Maybe, it depends."}},
                           Rule{.match = "blocked", .filtered = true, .refusal_reason = "content_filter"}});
    JudgeOptions opts;
    const auto yes = judge(instance("q#0", "GOOD", true), gw, opts);
    EXPECT_TRUE(yes.predicted);
    EXPECT_TRUE(yes.truth);
    EXPECT_FALSE(yes.indeterminate);
    const auto fn = judge(instance("q#1", "BAD", true), gw, opts);
    EXPECT_FALSE(fn.predicted);
    EXPECT_TRUE(fn.truth);
    const auto odd = judge(instance("q#2", "odd", false), gw, opts);
    EXPECT_TRUE(odd.indeterminate);
    EXPECT_FALSE(odd.predicted);
    const auto blocked = judge(instance("q#3", "blocked", true), gw, opts);
    EXPECT_TRUE(blocked.indeterminate);
    EXPECT_FALSE(blocked.predicted);
    EXPECT_NE(blocked.note.find("filtered"), std::string::npos);
}

TEST(Judge, ProviderFailureIsIndeterminate) {
    auto gw = gateway_for({Rule{.match = "", .fail = "unavailable"}});
    const auto o = judge(instance("q#0", "GOOD", true), gw, {});
    EXPECT_TRUE(o.indeterminate);
    EXPECT_FALSE(o.predicted);
    EXPECT_NE(o.note.find("ProviderUnavailable"), std::string::npos);
}

TEST(EvaluateVerifiability, PerfectJudgeAcrossGrid) {
    auto gw = gateway_for({{"GOOD", {"Yes, this is correct."}}, {"BAD", {"No, that is incorrect."}}});
    VerifiabilityOptions opts;
    opts.language = "en";
    opts.workers = 3;
    const auto run = evaluate_verifiability(instances(), gw, opts);
    ASSERT_EQ(run.per_temperature.size(), 5u);
    EXPECT_EQ(run.per_temperature[2].temperature, 0.5);
    for (const auto& tr : run.per_temperature) {
        EXPECT_DOUBLE_EQ(tr.report.accuracy, 1.0);
        EXPECT_EQ(tr.outcomes.size(), 5u);
        EXPECT_EQ(tr.outcomes[3].instance_id, "q2#1");
    }
    for (const auto& name : report_metric_names()) {
        EXPECT_DOUBLE_EQ(run.summary.at(name).mean, 1.0);
        EXPECT_DOUBLE_EQ(run.summary.at(name).sd, 0.0);
    }
    EXPECT_EQ(format_mean_sd(run.summary.at("accuracy")), "1.0000 ± 0.0000");
}

TEST(EvaluateVerifiability, FlippedJudgeScoresZero) {
    auto gw = gateway_for({{"GOOD", {"No."}}, {"BAD", {"Yes."}}});
    VerifiabilityOptions opts;
    opts.language = "en";
    opts.temperatures = {0.0, 1.0};
    const auto run = evaluate_verifiability(instances(), gw, opts);
    for (const auto& tr : run.per_temperature) {
        EXPECT_DOUBLE_EQ(tr.report.accuracy, 0.0);
        EXPECT_DOUBLE_EQ(tr.report.recall_macro, 0.0);
    }
}

TEST(EvaluateVerifiability, RepeatsAndValidation) {
    auto gw = gateway_for({{"GOOD", {"Yes.", "No."}}, {"BAD", {"No."}}});
    VerifiabilityOptions opts;
    opts.language = "en";
    opts.temperatures = {0.0};
    opts.repeats = 2;
    const auto run = evaluate_verifiability(instances(), gw, opts);
    const auto& r = run.per_temperature[0].report;
    EXPECT_EQ(r.total(), 10u);
    EXPECT_EQ(r.tp, 2u);  // repeat 0 says yes, repeat 1 says no
    EXPECT_EQ(r.fn, 2u);
    opts.temperatures = {};
    EXPECT_THROW(evaluate_verifiability(instances(), gw, opts), Error);
    opts.temperatures = {1.2};
    EXPECT_THROW(evaluate_verifiability(instances(), gw, opts), Error);
    opts.temperatures = {0.0};
    opts.language = "es";
    EXPECT_THROW(evaluate_verifiability(instances(), gw, opts), Error);
}

TEST(StabilitySummary, MeanPlusMinusPopulationSd) {
    // correct counts out of 10000 at five temperatures: mean 0.9220, sd 0.00147
    std::vector<double> acc;
    for (int correct : {9199, 9210, 9220, 9230, 9241}) {
        const auto r = classification_metrics(from_confusion(correct / 2, 0, correct - correct / 2, 10000 - correct));
        acc.push_back(r.accuracy);
    }
    const auto m = mean_sd(acc);
    EXPECT_NEAR(m.mean, 0.9220, 1e-12);
    EXPECT_EQ(format_mean_sd(m), "0.9220 ± 0.0015");
}

TEST(VerifiabilityIo, OutcomeRoundTripAndRunJson) {
    VerifiabilityOutcome o{"q#1", "q", "hi", 0.25, 1, false, true, true, "unclear", "abc"};
    EXPECT_EQ(outcome_from_json(nlohmann::json::parse(to_json(o).dump())), o);
    const auto j = to_json(classification_metrics(from_confusion(2, 0, 0, 0)));
    EXPECT_TRUE(j.at("auc").is_null());
}
