#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "relprobe/error.hpp"
#include "relprobe/synthetic.hpp"

using namespace relprobe;

int main(int argc, char** argv) {
  CLI::App app{"relprobe-synth: write a synthetic study with a planted relation"};
  std::string dir;
  SyntheticOptions opt;
  app.add_option("dir", dir, "output directory")->required();
  app.add_option("--seed", opt.seed, "master seed");
  app.add_option("--dim", opt.dim, "embedding dimension");
  app.add_option("--pairs", opt.n_pairs, "planted pairs");
  app.add_option("--noise", opt.noise, "noise std around the planted offset");
  app.add_option("--identity", opt.identity_nodes, "identity-pair nodes");
  app.add_option("--random-sizes", opt.random_sizes, "random dataset sizes");
  app.add_option("--random-repeats", opt.random_repeats, "random datasets per size");
  app.add_option("--runs", opt.runs, "training runs per experiment");
  app.add_option("--lr", opt.learning_rate, "learning rate");
  CLI11_PARSE(app, argc, argv);
  try {
    write_synthetic_study(dir, opt);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::cout << "wrote " << dir << "/study.json\n";
  return 0;
}
