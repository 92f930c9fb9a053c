#pragma once

#include <functional>
#include <string>
#include <vector>

#include "options.hpp"

namespace socialgat::cli {

struct Command {
  std::string name;
  std::string help;
  std::vector<OptionSpec> options;
  std::function<void(const Settings&)> run;
};

std::vector<Command> commands();

}  // namespace socialgat::cli
