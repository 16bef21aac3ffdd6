#include "mfwidth/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>

#include "commands.hpp"
#include "mfwidth/error.hpp"

namespace mfwidth::cli {

Sink::Sink(const std::string& path, std::ostream& fallback)
    : fallback_(fallback), path_(path) {
  if (!path.empty()) {
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw UsageError("cannot write '" + path + "'");
  }
}

std::ostream& Sink::stream() { return file_ ? *file_ : fallback_; }

void Sink::close() {
  if (file_) {
    file_->close();
    if (!*file_) throw std::runtime_error("failed writing '" + path_ + "'");
  }
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

// Grid values such as "-5:5:41" start with '-' and would otherwise be read as
// flags; glue them to their option.
std::vector<std::string> join_grid_values(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if ((args[i] == "--q" || args[i] == "--scales") && i + 1 < args.size()) {
      out.push_back(args[i] + "=" + args[i + 1]);
      ++i;
    } else {
      out.push_back(args[i]);
    }
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multifractal spectral-width analysis of audio signals", "mfwidth"};
  app.require_subcommand(1);

  std::vector<std::pair<CLI::App*, Action>> actions;
  for (auto add : {add_analyze, add_synth, add_cluster, add_confusion}) {
    Action action = add(app);
    actions.emplace_back(app.get_subcommands([](CLI::App*) { return true; }).back(), std::move(action));
  }

  std::vector<std::string> reversed = join_grid_values(args);
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  Streams streams{out, err};
  for (auto& [sub, action] : actions) {
    if (!sub->parsed()) continue;
    try {
      return action(streams);
    } catch (const UsageError& e) {
      err << "error: " << e.what() << "\n\n" << sub->help();
      return kExitUsage;
    } catch (const DataError& e) {
      err << "error: " << e.what() << '\n';
      return kExitData;
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitData;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return kExitUsage;
}

}  // namespace mfwidth::cli
