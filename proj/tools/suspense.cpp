// suspense: command-line front end for the suspense measures and their
// evaluation protocols.
//
//   suspense analyze|evaluate|turning-points|agreement|mock-embed|plot
//            --config <path> [--out <dir>] [--seed <int>] [overrides]
//
// The config file holds flat `key = value` lines using the option names
// below; command-line flags take precedence over file values.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "suspense/commands.hpp"

int main(int argc, char** argv) {
  using suspense::cli::RunConfig;
  RunConfig rc;

  CLI::App app{"Surprise and uncertainty-reduction measures over stories"};
  app.set_config("--config", "", "key = value configuration file");
  app.fallthrough();
  app.require_subcommand(1);

  app.add_option("--stories", rc.stories, "story JSONL");
  app.add_option("--embeddings", rc.embeddings, "embedding JSONL");
  app.add_option("--continuations", rc.continuations, "continuation tree JSONL");
  app.add_option("--sentiment", rc.sentiment, "sentiment JSONL");
  app.add_option("--annotations", rc.annotations, "annotation JSONL");
  app.add_option("--tp_gold", rc.tp_gold, "turning point gold JSONL");
  app.add_option("--measure_file", rc.measure_file, "measure CSV written by analyze");

  app.add_option("--measures", rc.measures, "measures to compute")->delimiter(',');
  app.add_option("--metric", rc.metric, "L1, L2 or L2_squared");
  app.add_option("--rollout", rc.rollout, "continuation depth 1..3");
  app.add_option("--temperature", rc.temperature, "softmax temperature");
  app.add_option("--alpha_mode", rc.alpha_mode, "magnitude or signed");
  app.add_option("--source", rc.source, "corpus or generated candidates");
  app.add_option("--branching", rc.branching, "children per depth for sampled trees")->delimiter(',');
  app.add_option("--default_candidate_alpha", rc.default_candidate_alpha, "alpha for candidates without sentiment");
  app.add_option("--similarity_as_change", rc.similarity_as_change, "report baselines as 1 - similarity");

  app.add_option("--mapping", rc.mapping, "values for BigDecrease,Decrease,Same,Increase,BigIncrease")
      ->delimiter(',');
  app.add_option("--fit_mapping", rc.fit_mapping, "fit the judgement mapping by cross-validation");
  app.add_option("--folds", rc.folds, "cross-validation folds for mapping fit");
  app.add_option("--ci_p", rc.ci_p, "significance level for confidence intervals");

  app.add_option("--agreement_level", rc.agreement_level, "nominal, ordinal or interval");
  app.add_option("--min_alpha", rc.min_alpha, "screening threshold on mean agreement");
  app.add_option("--min_rt_ms", rc.min_rt_ms, "screening threshold on mean reading time");

  app.add_option("--tp_positions", rc.tp_positions, "prior turning point positions")->delimiter(',');
  app.add_option("--tp_windows", rc.tp_windows, "half-widths of the turning point windows")->delimiter(',');

  app.add_option("--dim", rc.dim, "mock embedding dimension");
  app.add_option("--context_decay", rc.context_decay, "left-context decay for mock embeddings");
  app.add_option("--story", rc.story, "story id to plot");
  app.add_option("--seed", rc.seed, "random seed");
  app.add_option("--out", rc.out, "output directory");

  auto* analyze = app.add_subcommand("analyze", "compute measure series");
  auto* evaluate = app.add_subcommand("evaluate", "correlate measure series with human judgements");
  auto* tps = app.add_subcommand("turning-points", "predict and score turning points");
  auto* agreement = app.add_subcommand("agreement", "inter-annotator agreement and screening");
  auto* mock = app.add_subcommand("mock-embed", "deterministic hash embeddings for a story file");
  auto* plot = app.add_subcommand("plot", "SVG chart of one story's measure curves");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  return suspense::cli::guarded(
      [&]() -> int {
        if (*analyze) return suspense::cli::cmd_analyze(rc, std::cerr);
        if (*evaluate) return suspense::cli::cmd_evaluate(rc, std::cerr);
        if (*tps) return suspense::cli::cmd_turning_points(rc, std::cerr);
        if (*agreement) return suspense::cli::cmd_agreement(rc, std::cerr);
        if (*mock) return suspense::cli::cmd_mock_embed(rc, std::cerr);
        if (*plot) return suspense::cli::cmd_plot(rc, std::cerr);
        return 1;
      },
      std::cerr);
}
