// Writes a deterministic synthetic collection: corpus, topics, qrels, UQV.

#include <CLI11.hpp>

#include <iostream>

#include "synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic test collection"};
  std::string dir = "synthetic";
  uqvsim::synthetic::Options options;
  app.add_option("dir", dir, "Output directory");
  app.add_option("--docs", options.num_docs);
  app.add_option("--topics", options.num_topics);
  app.add_option("--seed", options.seed);
  CLI11_PARSE(app, argc, argv);

  try {
    const auto collection = uqvsim::synthetic::generate(options);
    uqvsim::synthetic::write(collection, dir);
    std::cout << collection.docs.size() << " documents, " << collection.topics.size()
              << " topics written to " << dir << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
