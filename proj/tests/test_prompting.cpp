#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fewtype/episodes.hpp"
#include "fewtype/prompting.hpp"
#include "fewtype/tiny_backend.hpp"

using namespace fewtype;
using backend::TinyBackend;
using backend::WordTokenizer;
using prompting::Template;

namespace {

corpus::TypingInstance instance_of(std::vector<std::string> tokens, std::size_t start,
                                   std::size_t end, const std::string& label = "X") {
    corpus::TypingInstance inst;
    inst.tokens = std::move(tokens);
    inst.span_start = start;
    inst.span_end = end;
    inst.label = label;
    return inst;
}

}  // namespace

TEST_CASE("Template: placeholder validation") {
    CHECK_NOTHROW(Template("{x} . {m} is a {MASK} ."));
    CHECK_THROWS_AS(Template("{x} {m}"), BadTemplateError);          // no mask
    CHECK_THROWS_AS(Template("{m} {MASK} {MASK}"), BadTemplateError);  // two masks
    CHECK_THROWS_AS(Template("{x} {MASK}"), BadTemplateError);       // no mention
    CHECK_THROWS_AS(Template("{x} {mask}"), BadTemplateError);      // unknown placeholder
    CHECK_THROWS_AS(Template("{x"), BadTemplateError);
}

TEST_CASE("apply_template: default pattern mirrors the sentence plus mention clause") {
    WordTokenizer tok({"Thanks", ",", "AJ", ".", "is", "a"});
    auto inst = instance_of({"Thanks", ",", "AJ"}, 2, 2);
    auto prompt = prompting::apply_template(inst, Template("{x} . {m} is a {MASK} ."), tok, 128);

    std::vector<int> expected = tok.encode("Thanks , AJ . AJ is a");
    expected.push_back(tok.mask_id());
    std::vector<int> dot = tok.encode(".");
    expected.insert(expected.end(), dot.begin(), dot.end());
    CHECK(prompt.token_ids == expected);
    CHECK(prompt.mask_position == 7);
    CHECK(prompt.token_ids[prompt.mask_position] == tok.mask_id());
}

TEST_CASE("apply_template: minimal two-unit pattern") {
    WordTokenizer tok({"tab"});
    auto inst = instance_of({"tab"}, 0, 0);
    auto prompt = prompting::apply_template(inst, Template("{m} {MASK}"), tok, 128);
    REQUIRE(prompt.token_ids.size() == 2);
    CHECK(prompt.mask_position == 1);
}

TEST_CASE("apply_template: long sentences truncate from the tail of {x} only") {
    std::vector<std::string> vocab = {"is", "a", ".", "needle"};
    for (int i = 0; i < 600; ++i) vocab.push_back("w" + std::to_string(i));
    WordTokenizer tok(vocab);

    std::vector<std::string> tokens;
    for (int i = 0; i < 500; ++i) tokens.push_back("w" + std::to_string(i));
    tokens.push_back("needle");
    auto inst = instance_of(tokens, 500, 500);

    auto prompt = prompting::apply_template(inst, Template("{x} . {m} is a {MASK} ."), tok, 128);
    CHECK(prompt.token_ids.size() == 128);
    CHECK(prompt.mask_position < prompt.token_ids.size());
    CHECK(prompt.token_ids[prompt.mask_position] == tok.mask_id());
    // The mention copy in the template clause survives; the {x} copy of the
    // needle was truncated away with the sentence tail.
    int needle = *tok.single_token_id("needle");
    CHECK(std::count(prompt.token_ids.begin(), prompt.token_ids.end(), needle) == 1);
    // Leading sentence tokens survive in order.
    CHECK(prompt.token_ids[0] == tok.encode("w0")[0]);
}

TEST_CASE("apply_template: mention plus template overhead beyond the limit errors") {
    std::vector<std::string> vocab = {"is", "a", "."};
    for (int i = 0; i < 40; ++i) vocab.push_back("m" + std::to_string(i));
    WordTokenizer tok(vocab);
    std::vector<std::string> tokens;
    for (int i = 0; i < 20; ++i) tokens.push_back("m" + std::to_string(i));
    auto inst = instance_of(tokens, 0, 19);
    CHECK_THROWS_AS(prompting::apply_template(inst, Template("{x} . {m} is a {MASK} ."), tok, 16),
                    MentionTooLongError);
}

TEST_CASE("apply_template: mask position always survives truncation") {
    WordTokenizer tok({"is", "a", ".", "m"});
    for (std::size_t len = 1; len < 60; ++len) {
        std::vector<std::string> tokens(len, "m");
        auto inst = instance_of(tokens, 0, 0);
        auto prompt = prompting::apply_template(inst, Template("{x} . {m} is a {MASK} ."), tok, 16);
        REQUIRE(prompt.token_ids.size() <= 16);
        CHECK(prompt.token_ids.at(prompt.mask_position) == tok.mask_id());
    }
}

TEST_CASE("word_distribution: normalization and uniform degenerate case") {
    std::vector<std::string> vocab;
    for (int i = 0; i < 37; ++i) vocab.push_back("v" + std::to_string(i));
    TinyBackend be(vocab, {.hidden_dim = 8});
    auto params = be.init_params(4);

    std::vector<double> h(8, 0.3);
    auto p = be.word_distribution(h, params);
    REQUIRE(p.size() == be.spec().vocab_size);
    double sum = std::accumulate(p.begin(), p.end(), 0.0);
    CHECK(std::abs(sum - 1.0) < 1e-6);

    // Zero weights and bias: constant logits, exactly uniform.
    auto zero = params;
    for (auto& [name, arr] : zero)
        if (name != "embedding") std::fill(arr.data.begin(), arr.data.end(), 0.0);
    std::fill(zero.at("embedding").data.begin(), zero.at("embedding").data.end(), 0.0);
    auto uniform = be.word_distribution(std::vector<double>(8, 0.0), zero);
    for (double v : uniform) CHECK(v == doctest::Approx(1.0 / 40.0).epsilon(1e-12));
}

TEST_CASE("word_distribution: matches an independent recomputation") {
    std::vector<std::string> vocab;
    for (int i = 0; i < 11; ++i) vocab.push_back("v" + std::to_string(i));
    TinyBackend be(vocab, {.hidden_dim = 5});
    auto params = be.init_params(0);
    const std::size_t d = 5, v = be.spec().vocab_size;

    std::vector<double> h = {0.1, -0.4, 0.9, 0.0, 0.25};
    auto got = be.word_distribution(h, params);

    // Recompute logits = E tanh(W1 h + b1) with plain loops.
    const auto& w1 = params.at("head_w").data;
    const auto& b1 = params.at("head_b").data;
    const auto& emb = params.at("embedding").data;
    std::vector<double> act(d);
    for (std::size_t i = 0; i < d; ++i) {
        double acc = b1[i];
        for (std::size_t j = 0; j < d; ++j) acc += w1[i * d + j] * h[j];
        act[i] = std::tanh(acc);
    }
    std::vector<double> expected(v);
    double z = 0.0;
    for (std::size_t w = 0; w < v; ++w) {
        double logit = 0.0;
        for (std::size_t j = 0; j < d; ++j) logit += emb[w * d + j] * act[j];
        expected[w] = std::exp(logit);
        z += expected[w];
    }
    for (std::size_t w = 0; w < v; ++w) CHECK(got[w] == doctest::Approx(expected[w] / z).epsilon(1e-10));
}

TEST_CASE("word_distribution: dimension mismatch") {
    TinyBackend be({"v0", "v1"}, {.hidden_dim = 4});
    auto params = be.init_params(1);
    CHECK_THROWS_AS(be.word_distribution(std::vector<double>(3, 0.0), params),
                    DimensionMismatchError);
}

TEST_CASE("label_distribution: arithmetic forced by the verbalizer mean") {
    WordTokenizer tok({"alpha", "beta", "file", "document", "other"});
    corpus::LabelSet labels({"A", "B"});

    SUBCASE("single word per label") {
        auto v = prompting::parse_verbalizer("A\talpha\nB\tbeta\n");
        prompting::BoundVerbalizer bound(v, tok, labels);
        std::vector<double> pw(tok.vocab_size(), 0.0);
        pw[*tok.single_token_id("alpha")] = 0.2;
        pw[*tok.single_token_id("beta")] = 0.3;
        pw[*tok.single_token_id("other")] = 0.5;
        auto q = prompting::label_distribution(pw, bound, labels);
        CHECK(q[0] == doctest::Approx(0.4).epsilon(1e-12));
        CHECK(q[1] == doctest::Approx(0.6).epsilon(1e-12));
    }

    SUBCASE("weighted multi-word entry") {
        // A scores (2*0.1 + 1*0.2)/2 = 0.2, B scores 0.05 -> [0.8, 0.2].
        auto v = prompting::parse_verbalizer("A\tfile:2,document\nB\tbeta\n");
        prompting::BoundVerbalizer bound(v, tok, labels);
        std::vector<double> pw(tok.vocab_size(), 0.0);
        pw[*tok.single_token_id("file")] = 0.1;
        pw[*tok.single_token_id("document")] = 0.2;
        pw[*tok.single_token_id("beta")] = 0.05;
        pw[*tok.single_token_id("other")] = 0.65;
        auto q = prompting::label_distribution(pw, bound, labels);
        CHECK(q[0] == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(q[1] == doctest::Approx(0.2).epsilon(1e-12));
    }

    SUBCASE("all verbalizer mass zero falls back to uniform") {
        auto v = prompting::parse_verbalizer("A\talpha\nB\tbeta\n");
        prompting::BoundVerbalizer bound(v, tok, labels);
        std::vector<double> pw(tok.vocab_size(), 0.0);
        pw[*tok.single_token_id("other")] = 1.0;
        auto q = prompting::label_distribution(pw, bound, labels);
        CHECK(q == std::vector<double>{0.5, 0.5});
    }
}

TEST_CASE("label_distribution: sums to one and keeps label order") {
    WordTokenizer tok({"a0", "a1", "a2", "x"});
    corpus::LabelSet labels({"L0", "L1", "L2"});
    auto v = prompting::parse_verbalizer("L0\ta0\nL1\ta1\nL2\ta2\n");
    prompting::BoundVerbalizer bound(v, tok, labels);

    fewtype::episodes::SplitMixRng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> pw(tok.vocab_size());
        double sum = 0.0;
        for (double& x : pw) {
            x = static_cast<double>(rng.bounded(1000) + 1);
            sum += x;
        }
        for (double& x : pw) x /= sum;
        auto q = prompting::label_distribution(pw, bound, labels);
        CHECK(std::abs(std::accumulate(q.begin(), q.end(), 0.0) - 1.0) < 1e-9);
        // Score order matches the raw verbalizer-word masses.
        double m0 = pw[*tok.single_token_id("a0")];
        double m1 = pw[*tok.single_token_id("a1")];
        if (m0 > m1) CHECK(q[0] > q[1]);
    }
}

TEST_CASE("label_distribution: moving mass onto a verbalizer word raises its label") {
    WordTokenizer tok({"a0", "a1", "junk"});
    corpus::LabelSet labels({"L0", "L1"});
    prompting::BoundVerbalizer bound(prompting::parse_verbalizer("L0\ta0\nL1\ta1\n"), tok, labels);

    std::vector<double> pw(tok.vocab_size(), 0.0);
    pw[*tok.single_token_id("a0")] = 0.2;
    pw[*tok.single_token_id("a1")] = 0.3;
    pw[*tok.single_token_id("junk")] = 0.5;
    double before = prompting::label_distribution(pw, bound, labels)[0];

    pw[*tok.single_token_id("a0")] += 0.25;  // taken from a word in no verbalizer
    pw[*tok.single_token_id("junk")] -= 0.25;
    double after = prompting::label_distribution(pw, bound, labels)[0];
    CHECK(after > before);
}

TEST_CASE("verbalizer parsing: weights, comments, merging, errors") {
    auto v = prompting::parse_verbalizer(
        "# comment line\n"
        "A\tfile:2.5,document\n"
        "\n"
        "B\tbeta\n"
        "A\tarchive\n");
    CHECK(v.entries.at("A").size() == 3);
    CHECK(v.entries.at("A")[0].weight == doctest::Approx(2.5));
    CHECK(v.entries.at("A")[1].weight == doctest::Approx(1.0));
    CHECK(v.entries.at("B")[0].word == "beta");

    CHECK_THROWS_AS(prompting::parse_verbalizer("A file\n"), MalformedLineError);  // no tab
    CHECK_THROWS_AS(prompting::parse_verbalizer("A\tfile:-1\n"), MalformedLineError);
    CHECK_THROWS_AS(prompting::parse_verbalizer("A\tfile:zero\n"), MalformedLineError);
    CHECK_THROWS_AS(prompting::parse_verbalizer("A\t\n"), MalformedLineError);
}

TEST_CASE("verbalizer binding: unknown word and missing label") {
    WordTokenizer tok({"alpha"});
    corpus::LabelSet labels({"A", "B"});
    CHECK_THROWS_AS(
        prompting::BoundVerbalizer(prompting::parse_verbalizer("A\talpha\nB\tmissing\n"), tok,
                                   labels),
        UnknownWordError);
    CHECK_THROWS_AS(
        prompting::BoundVerbalizer(prompting::parse_verbalizer("A\talpha\n"), tok, labels),
        ConfigError);
}
