#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "commands.hpp"
#include "socialgat/errors.hpp"

namespace {

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

int fail(const std::string& code, const std::string& message) {
  std::cerr << "error[" << code << "]: " << one_line(message) << "\n";
  return code == "USAGE" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace socialgat::cli;
  CLI::App app{"socialgat: socially-aware text classification with graph attention"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SOCIALGAT_VERSION);

  auto cmds = commands();
  std::vector<std::unique_ptr<Settings>> settings;
  std::vector<CLI::App*> subs;
  for (auto& c : cmds) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    settings.push_back(std::make_unique<Settings>(c.name, c.options));
    settings.back()->attach(*sub);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("USAGE", e.what());
  }

  for (std::size_t i = 0; i < cmds.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      settings[i]->resolve();
      cmds[i].run(*settings[i]);
      return 0;
    } catch (const socialgat::Error& e) {
      return fail(e.code(), e.what());
    } catch (const std::filesystem::filesystem_error& e) {
      return fail("IO", e.what());
    } catch (const std::exception& e) {
      return fail("INTERNAL", e.what());
    }
  }
  return fail("USAGE", "no command given");
}
