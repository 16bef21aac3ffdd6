#pragma once

#include <fstream>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace mfwidth::cli {

// Raised for bad flag values discovered after parsing; maps to exit 64.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised for unparseable input data; maps to exit 65.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

// Each command registers its subcommand and returns the action to run after
// a successful parse.
using Action = std::function<int(Streams)>;

Action add_analyze(CLI::App& app);
Action add_synth(CLI::App& app);
Action add_cluster(CLI::App& app);
Action add_confusion(CLI::App& app);

// Output sink: the named file when set, the stream otherwise.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback);
  std::ostream& stream();
  void close();

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream& fallback_;
  std::string path_;
};

std::string format_double(double v);

}  // namespace mfwidth::cli
