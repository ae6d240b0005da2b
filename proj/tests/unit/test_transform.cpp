#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <memory>
#include <string>

#include "vdbench/clex.hpp"
#include "vdbench/corpus.hpp"
#include "vdbench/error.hpp"
#include "vdbench/transform.hpp"

using namespace vdbench;

namespace {

const CodeSample kSum{"x1",
                      "static int sum(const int *v, int n)\n"
                      "{\n"
                      "    /* add */\n"
                      "    int t = 0;\n"
                      "    for (int i = 0; i < n; i++) t += v[i];\n"
                      "    return n > 1 ? t + sum(v, n - 1) : t;\n"
                      "}\n",
                      1};

const CodeSample kVoid{"x2",
                       "void reset(struct ctx *c, int flags) // clear state\n"
                       "{\n"
                       "    if (!c)\n"
                       "        return;\n"
                       "#ifdef DEBUG\n"
                       "    log_it(\"reset %d\", flags);\n"
                       "#endif\n"
                       "    c->flags = flags;\n"
                       "    c->n = 0;\n"
                       "}\n",
                       0};

std::shared_ptr<const Dataset> aux() {
  return std::make_shared<const Dataset>(
      Dataset{{"a1", "int aux(void) { return 7; } /* done */", 0}, {"a2", "char *s = \"x*/y\";", 1}});
}

TransformSpec spec_for(TransformId id, std::uint64_t seed = 5) {
  TransformSpec s;
  s.id = id;
  s.seed = seed;
  s.aux_corpus = aux();
  return s;
}

CodeSample with_code(CodeSample s, std::string code) {
  s.code = std::move(code);
  return s;
}

std::string replace_once(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  if (at != std::string::npos) text.replace(at, from.size(), to);
  return text;
}

std::string identifier_named_like(const std::string& code, std::size_t length) {
  for (const auto& t : clex::tokenize(code)) {
    if (t.is(clex::TokenKind::kIdentifier) && t.text.size() == length) return t.text;
  }
  return {};
}

}  // namespace

TEST(TransformNames, ParseAndList) {
  EXPECT_EQ(parse_transform("T5"), TransformId::kT5);
  EXPECT_EQ(parse_transform("adv"), TransformId::kAdv);
  EXPECT_FALSE(parse_transform("t12"));
  EXPECT_EQ(parse_transform_list("t1..t3,t10").size(), 4u);
  EXPECT_EQ(parse_transform_list("t1..t11").size(), 11u);
  EXPECT_THROW(parse_transform_list("t1,t99"), Error);
  EXPECT_TRUE(needs_shape(TransformId::kT2));
  EXPECT_FALSE(needs_shape(TransformId::kT7));
}

class EveryTransform : public ::testing::TestWithParam<int> {};

TEST_P(EveryTransform, VerifiesAndKeepsIdentity) {
  const TransformId id = static_cast<TransformId>(GetParam());
  for (const CodeSample& s : {kSum, kVoid}) {
    const TransformSpec spec = spec_for(id);
    const ApplyResult r = apply(spec, s);
    ASSERT_FALSE(r.skipped()) << r.reason;
    EXPECT_EQ(r.sample.id, s.id);
    EXPECT_EQ(r.sample.label, s.label);
    EXPECT_TRUE(clex::lexes(r.sample.code));
    const VerifyResult v = verify_allowed_change(s, r.sample, spec);
    EXPECT_TRUE(v.pass) << to_string(id) << ": " << v.diff << "\n" << r.sample.code;
    EXPECT_EQ(apply(spec, s).sample, r.sample);
  }
}

INSTANTIATE_TEST_SUITE_P(T1ToT11, EveryTransform, ::testing::Range(1, 12));

TEST(Transform, SeedChangesRandomChoices) {
  EXPECT_NE(apply(spec_for(TransformId::kT1, 1), kSum).sample.code,
            apply(spec_for(TransformId::kT1, 2), kSum).sample.code);
}

TEST(Transform, T1RenamesParametersOnly) {
  const std::string out = apply(spec_for(TransformId::kT1), kSum).sample.code;
  EXPECT_EQ(out.find("*v"), std::string::npos);
  EXPECT_NE(out.find("int t = 0"), std::string::npos);
  EXPECT_NE(out.find("sum("), std::string::npos);
}

TEST(Transform, T1LeavesMembersAlone) {
  const std::string out = apply(spec_for(TransformId::kT1), kVoid).sample.code;
  EXPECT_NE(out.find("->flags = "), std::string::npos);
  EXPECT_EQ(out.find("int flags"), std::string::npos);
}

TEST(Transform, T2PermutesCallArguments) {
  const std::string out = apply(spec_for(TransformId::kT2), kSum).sample.code;
  EXPECT_NE(out.find("sum(int n, const int *v)"), std::string::npos);
  EXPECT_NE(out.find("sum(n - 1, v)"), std::string::npos);
}

TEST(Transform, T2SingleParameterIsUnchanged) {
  const CodeSample one{"o", "int f(int a) { return a; }", 0};
  EXPECT_EQ(apply(spec_for(TransformId::kT2), one).sample.code, one.code);
}

TEST(Transform, T9RemovesEveryCommentAndIsIdempotent) {
  const auto spec = spec_for(TransformId::kT9);
  const CodeSample once = apply(spec, kVoid).sample;
  for (const auto& t : clex::tokenize(once.code)) EXPECT_FALSE(t.is_comment());
  EXPECT_EQ(apply(spec, once).sample, once);
}

TEST(Transform, T10NeedsAuxAndSanitizes) {
  TransformSpec spec = spec_for(TransformId::kT10);
  spec.aux_corpus.reset();
  EXPECT_THROW(apply(spec, kSum), Error);

  spec.aux_corpus = std::make_shared<const Dataset>(Dataset{{"a", "char *s = \"x*/y\";", 0}});
  const CodeSample out = apply(spec, kSum).sample;
  EXPECT_TRUE(clex::lexes(out.code));
  EXPECT_NE(out.code.find("x* /y"), std::string::npos);
}

TEST(Transform, T10NeverUsesTheSampleItself) {
  TransformSpec spec = spec_for(TransformId::kT10);
  spec.aux_corpus = std::make_shared<const Dataset>(Dataset{kSum, {"other", "int other;", 0}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = seed;
    EXPECT_NE(apply(spec, kSum).sample.code.find("int other;"), std::string::npos);
  }
}

TEST(Transform, T11DelegatesDeterministically) {
  std::set<TransformId> seen;
  for (int i = 0; i < 200; ++i) {
    const std::string id = "s" + std::to_string(i);
    const TransformId c = t11_choice(3, id);
    EXPECT_EQ(c, t11_choice(3, id));
    EXPECT_GE(static_cast<int>(c), 1);
    EXPECT_LE(static_cast<int>(c), 10);
    seen.insert(c);
  }
  EXPECT_EQ(seen.size(), 10u);
  const ApplyResult r = apply(spec_for(TransformId::kT11, 3), kSum);
  EXPECT_EQ(r.applied, t11_choice(3, kSum.id));
}

TEST(Transform, UnshapeableInputIsSkipped) {
  const CodeSample macro{"m", "DEFINE_FN(foo) { return 1; }", 0};
  const ApplyResult r = apply(spec_for(TransformId::kT1), macro);
  EXPECT_TRUE(r.skipped());
  EXPECT_FALSE(r.reason.empty());
  // Body-only insertions still work.
  EXPECT_FALSE(apply(spec_for(TransformId::kT4), macro).skipped());
}

TEST(Transform, AmplifyDropsSkipsInOrder) {
  const Dataset in{kSum, {"m", "DEFINE_FN(foo) { return 1; }", 0}, kVoid};
  const AmplifyResult r = amplify(in, spec_for(TransformId::kT3));
  ASSERT_EQ(r.samples.size(), 2u);
  EXPECT_EQ(r.samples[0].id, "x1");
  EXPECT_EQ(r.samples[1].id, "x2");
  ASSERT_EQ(r.skips.size(), 1u);
  EXPECT_EQ(r.skips[0].id, "m");
}

TEST(Transform, LexErrorPropagates) {
  EXPECT_THROW(apply(spec_for(TransformId::kT1), CodeSample{"bad", "int f() { \"open }", 0}), LexError);
}

TEST(Transform, AdvPicksTheWorstName) {
  // Model that is more confident in "vulnerable" the longer the code.
  struct Length : ModelHandle {
    std::string_view kind() const override { return "len"; }
    std::vector<double> predict(std::span<const CodeSample> s) override {
      std::vector<double> p;
      for (const auto& x : s) p.push_back(static_cast<double>(x.code.size() % 97) / 97.0);
      return p;
    }
  };
  auto model = std::make_shared<Length>();
  TransformSpec spec = spec_for(TransformId::kAdv);
  spec.adv_model = model;
  const ApplyResult r = apply(spec, kSum);
  ASSERT_FALSE(r.skipped());
  EXPECT_TRUE(verify_allowed_change(kSum, r.sample, spec).pass);
  EXPECT_NE(r.sample.code.find("{\n    int "), std::string::npos);

  spec.adv_model.reset();
  EXPECT_THROW(apply(spec, kSum), Error);
}

// Outputs with one illegal edit each; verify must reject all of them.
TEST(Verify, RejectsMutations) {
  auto check_rejects = [](TransformId id, const CodeSample& before, auto mutate) {
    const TransformSpec spec = spec_for(id);
    const CodeSample good = apply(spec, before).sample;
    const CodeSample bad = with_code(good, mutate(good.code));
    ASSERT_NE(bad.code, good.code);
    const VerifyResult v = verify_allowed_change(before, bad, spec);
    EXPECT_FALSE(v.pass) << to_string(id) << " accepted:\n" << bad.code;
    EXPECT_FALSE(v.diff.empty());
  };
  // t1: one use left unrenamed; operator changed; local renamed too
  check_rejects(TransformId::kT1, kSum, [](std::string c) {
    const std::string fresh = identifier_named_like(c, 8);
    return replace_once(c, fresh + "[i]", "v[i]");
  });
  check_rejects(TransformId::kT1, kSum, [](std::string c) { return replace_once(c, "t += ", "t -= "); });
  check_rejects(TransformId::kT1, kSum, [](std::string c) { return replace_once(c, "int t = 0", "int q = 0"); });
  // t2: call arguments left in the old order
  check_rejects(TransformId::kT2, kSum, [](std::string c) { return replace_once(c, "sum(n - 1, v)", "sum(v, n - 1)"); });
  // t3: recursive call not renamed
  check_rejects(TransformId::kT3, kSum, [](std::string c) {
    const std::string fresh = identifier_named_like(c, 8);
    return replace_once(c, fresh + "(v, n - 1)", "sum(v, n - 1)");
  });
  // t4: live branch; non-fresh variable
  check_rejects(TransformId::kT4, kSum, [](std::string c) { return replace_once(c, "if (0)", "if (1)"); });
  check_rejects(TransformId::kT4, kSum, [](std::string c) {
    const std::string fresh = identifier_named_like(c.substr(c.find("if (0)")), 8);
    std::string out = c;
    for (auto at = out.find(fresh); at != std::string::npos; at = out.find(fresh)) out.replace(at, fresh.size(), "t");
    return out;
  });
  // t5: comment outside the body; two comments
  check_rejects(TransformId::kT5, kSum, [](std::string c) { return "/* x */ " + kSum.code; });
  check_rejects(TransformId::kT5, kSum, [](std::string c) { return replace_once(c, "int t", "/* y */ int t"); });
  // t6: helper body altered
  check_rejects(TransformId::kT6, kSum, [](std::string c) { return replace_once(c, "int t = 0", "int t = 1"); });
  // t7: non-whitespace edit
  check_rejects(TransformId::kT7, kSum, [](std::string c) { return replace_once(c, "i++", "++i"); });
  check_rejects(TransformId::kT7, kSum, [](std::string c) { return replace_once(c, "/* add */", "/* sub */"); });
  // t8: call to something other than the new function
  check_rejects(TransformId::kT8, kSum, [](std::string c) {
    const std::string fresh = identifier_named_like(c, 8);
    return replace_once(c, "    " + fresh + "();", "    abort();");
  });
  // t9: comment kept; code changed
  check_rejects(TransformId::kT9, kVoid, [](std::string c) { return c + "// left\n"; });
  check_rejects(TransformId::kT9, kVoid, [](std::string c) { return replace_once(c, "c->n = 0", "c->n = 1"); });
  // t10: code inside the appended comment is fine, code after it is not
  check_rejects(TransformId::kT10, kSum, [](std::string c) { return c + "\nint extra;"; });
}

TEST(Verify, RejectsIdentityAndLabelChanges) {
  const TransformSpec spec = spec_for(TransformId::kT7);
  CodeSample out = apply(spec, kSum).sample;
  out.label = 0;
  EXPECT_FALSE(verify_allowed_change(kSum, out, spec).pass);
  out = apply(spec, kSum).sample;
  out.id = "other";
  EXPECT_FALSE(verify_allowed_change(kSum, out, spec).pass);
  out = with_code(kSum, "int f() { \"open }");
  EXPECT_FALSE(verify_allowed_change(kSum, out, spec).pass);
}

TEST(Verify, CorpusSweep) {
  LoadOptions opts;
  opts.write_rejects = false;
  const Dataset corpus = load_records(std::string(VDBENCH_TEST_DATA) + "/aws_lc_functions.jsonl", opts).samples;
  ASSERT_GE(corpus.size(), 500u);
  const auto aux_set = std::make_shared<const Dataset>(corpus);
  for (int k = 1; k <= 10; ++k) {
    TransformSpec spec;
    spec.id = static_cast<TransformId>(k);
    spec.seed = 11;
    spec.aux_corpus = aux_set;
    std::size_t failures = 0;
    for (std::size_t i = 0; i < 200; ++i) {
      const ApplyResult r = apply(spec, corpus[i]);
      if (r.skipped()) continue;
      if (!verify_allowed_change(corpus[i], r.sample, spec).pass || !clex::lexes(r.sample.code)) ++failures;
    }
    EXPECT_EQ(failures, 0u) << to_string(spec.id);
  }
}
