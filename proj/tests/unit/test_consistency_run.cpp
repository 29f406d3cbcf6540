#include <gtest/gtest.h>

#include <filesystem>

#include "crossling/common/error.hpp"
#include "crossling/consistency/evaluate.hpp"
#include "crossling/llmgate/providers.hpp"

using namespace crossling;
using namespace crossling::consistency;
using Rule = llm::MockChatProvider::Rule;

namespace {

corpus::Dataset questions(const std::string& lang = "en") {
    return {{"q1", corpus::DatasetName::LiveQA, lang, "How do I treat a mild fever?", "Rest and fluids.",
             corpus::Polarity::Unlabeled},
            {"q2", corpus::DatasetName::LiveQA, lang, "What causes migraines?", "Several triggers.",
             corpus::Polarity::Unlabeled}};
}

ConsistencyOptions fast_options(std::vector<double> temps = {0.0}) {
    ConsistencyOptions o;
    o.language = "en";
    o.temperatures = std::move(temps);
    o.topics.lda20.iterations = 40;
    o.topics.lda100.iterations = 40;
    o.topics.hdp.iterations = 20;
    o.topics.hdp.truncation = 10;
    return o;
}

struct Harness {
    explicit Harness(std::vector<Rule> rules, std::filesystem::path journal = {})
        : provider(std::make_shared<llm::MockChatProvider>(std::move(rules))),
          gateway(provider, std::make_shared<llm::ResponseCache>(std::move(journal)),
                  llm::GatewayConfig{.retry = llm::RetryPolicy::immediate(0)}) {}

    ConsistencyRun run(const corpus::Dataset& data, const ConsistencyOptions& options,
                       corpus::TranslationProvider* back = nullptr) {
        return evaluate_consistency(data, options, {gateway, embeddings, identifier, back});
    }

    std::shared_ptr<llm::MockChatProvider> provider;
    llm::Gateway gateway;
    HashingEmbeddingProvider embeddings{64};
    TrigramLanguageIdentifier identifier;
};

const std::string kFeverAnswer =
    "Drink plenty of water and get some rest. See a doctor if the fever lasts more than three days.";

std::vector<Rule> varied_rules() {
    return {{"fever", {kFeverAnswer, "Rest at home and drink fluids. A doctor should check a fever that lasts for days.",
                       "Take paracetamol and drink water. Call a doctor when the fever does not go away."}},
            {"migraine", {"Migraines can be triggered by stress, poor sleep and some foods.",
                          "Common triggers of migraine include stress, hormones and lack of sleep."}}};
}

}  // namespace

TEST(ConsistencyRun, IdenticalAnswersScoreOne) {
    Harness h(std::vector<Rule>{{"", {kFeverAnswer}}});
    const auto run = h.run(questions(), fast_options());
    ASSERT_TRUE(run.failures.empty());
    ASSERT_EQ(run.scores.size(), 2u);
    for (const auto& s : run.scores) {
        EXPECT_EQ(s.k_effective, 10u);
        for (const auto& m : {"sim_1gram", "sim_2gram", "bertscore_f", "sim_sent", "sim_lda_20", "sim_lda_100",
                              "sim_hdp", "lang_cons"})
            EXPECT_NEAR(metric_value(s, m), 1.0, 1e-6) << m;
        EXPECT_DOUBLE_EQ(s.length_mean, 19.0);  // 8 + 11 words
    }
    EXPECT_EQ(h.provider->calls(), 20u);
}

TEST(ConsistencyRun, ReplayFromCacheIsIdenticalWithoutCalls) {
    const auto journal = std::filesystem::temp_directory_path() / "crossling_consistency_replay.jsonl";
    std::filesystem::remove(journal);
    const auto options = fast_options({0.0, 1.0});
    std::string first_csv;
    {
        Harness h(varied_rules(), journal);
        first_csv = scores_csv(h.run(questions(), options).scores);
        EXPECT_EQ(h.provider->calls(), 40u);
    }
    Harness replay(varied_rules(), journal);
    const auto second = replay.run(questions(), options);
    EXPECT_EQ(replay.provider->calls(), 0u);
    EXPECT_EQ(scores_csv(second.scores), first_csv);
    ASSERT_EQ(second.scores.size(), 4u);
    EXPECT_EQ(second.scores[0].temperature, 0.0);
    EXPECT_EQ(second.scores[2].temperature, 1.0);
    EXPECT_EQ(second.scores[1].question_id, "q2");
    std::filesystem::remove(journal);
}

TEST(ConsistencyRun, VariedAnswersStayInRange) {
    Harness h(varied_rules());
    const auto run = h.run(questions(), fast_options());
    ASSERT_EQ(run.scores.size(), 2u);
    for (const auto& s : run.scores) {
        for (const auto& m : metric_names()) {
            if (m == "length_mean") continue;
            EXPECT_GE(metric_value(s, m), 0.0) << m;
            EXPECT_LE(metric_value(s, m), 1.0) << m;
        }
        EXPECT_LT(s.sim_1gram, 1.0);
        EXPECT_GT(s.length_mean, 0.0);
    }
}

TEST(ConsistencyRun, FilteredQuestionFailsAloneAndRunContinues) {
    Rule blocked{.match = "migraine", .filtered = true, .refusal_reason = "content_filter"};
    Harness h({blocked, {"fever", {kFeverAnswer}}});
    const auto run = h.run(questions(), fast_options());
    ASSERT_EQ(run.scores.size(), 1u);
    EXPECT_EQ(run.scores[0].question_id, "q1");
    ASSERT_EQ(run.failures.size(), 1u);
    EXPECT_EQ(run.failures[0].question_id, "q2");
    EXPECT_NE(run.failures[0].reason.find("TooFewAnswers"), std::string::npos);
}

TEST(ConsistencyRun, PartialFilteringIsCounted) {
    AnswerSet set{"q", "en", 0.0, {kFeverAnswer, kFeverAnswer, kFeverAnswer}, 7};
    TopicModels models = TopicModels::fit(set.answers, fast_options().topics);
    HashingEmbeddingProvider emb;
    TrigramLanguageIdentifier id;
    const auto s = score_answer_set(set, models, emb, id, nullptr);
    EXPECT_EQ(s.k_effective, 3u);
    EXPECT_EQ(s.filtered, 7u);
    set.answers.resize(1);
    EXPECT_THROW(score_answer_set(set, models, emb, id, nullptr), Error);
}

TEST(ConsistencyRun, RejectsBadLanguageAndTemperature) {
    Harness h(std::vector<Rule>{});
    EXPECT_THROW(h.run(questions("es"), fast_options()), Error);
    EXPECT_THROW(h.run(questions(), fast_options({1.5})), Error);
    EXPECT_THROW(h.run(questions(), fast_options({})), Error);
}

namespace {
class FixedTranslator final : public corpus::TranslationProvider {
public:
    std::string translate(const std::string&, const std::string& source, const std::string& target) override {
        EXPECT_EQ(source, "es");
        EXPECT_EQ(target, "en");
        return "one two three";
    }
};
}  // namespace

TEST(ConsistencyRun, LengthUsesBackTranslationForOtherLanguages) {
    Harness h(std::vector<Rule>{{"", {"Beba mucha agua y descanse. Consulte a un médico si la fiebre dura más de tres días."}}});
    auto options = fast_options();
    options.language = "es";
    FixedTranslator back;
    const auto run = h.run(questions("es"), options, &back);
    ASSERT_EQ(run.scores.size(), 2u);
    EXPECT_DOUBLE_EQ(run.scores[0].length_mean, 3.0);
    EXPECT_NEAR(run.scores[0].lang_cons, 1.0, 1e-12);
}

TEST(ConsistencyScoresIo, CsvAndJsonlRoundTrip) {
    Harness h(varied_rules());
    const auto scores = h.run(questions(), fast_options({0.0, 0.5})).scores;
    const auto csv_text = scores_csv(scores);
    const auto back = parse_scores_csv(csv_text);
    ASSERT_EQ(back.size(), scores.size());
    EXPECT_EQ(scores_csv(back), csv_text);
    EXPECT_EQ(csv_text.substr(0, csv_text.find('\n')),
              "question_id,language,temperature,k_effective,filtered,sim_1gram,sim_2gram,length_mean,bertscore_f,"
              "sim_sent,sim_lda_20,sim_lda_100,sim_hdp,lang_cons,sim_sent_raw");
    for (const auto& s : scores) EXPECT_EQ(scores_from_json(nlohmann::json::parse(to_json(s).dump())), s);
    EXPECT_THROW(parse_scores_csv("question_id,language\nq,en\n"), Error);
}

TEST(ConsistencyScoresIo, AggregatePerLanguageAndTemperature) {
    std::vector<ConsistencyScores> scores(3);
    scores[0] = {.question_id = "a", .language = "en", .temperature = 0.0, .sim_sent = 0.9};
    scores[1] = {.question_id = "b", .language = "en", .temperature = 0.0, .sim_sent = 0.7};
    scores[2] = {.question_id = "a", .language = "hi", .temperature = 0.0, .sim_sent = 0.5};
    const auto agg = aggregate_scores(scores);
    ASSERT_EQ(agg.size(), 2u);
    EXPECT_EQ(agg[0].language, "en");
    EXPECT_EQ(agg[0].questions, 2u);
    EXPECT_DOUBLE_EQ(agg[0].means.at("sim_sent"), 0.8);
    EXPECT_DOUBLE_EQ(agg[1].means.at("sim_sent"), 0.5);
    EXPECT_THROW(metric_value(scores[0], "sim_bogus"), Error);
}
