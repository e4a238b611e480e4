#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "pseudoqe/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "pseudoqe: pseudo-MQM data generation and translation quality "
      "estimation"};
  app.require_subcommand(0, 1);
  app.set_config("--config", "",
                 "INI configuration file with one [subcommand] section per "
                 "command; flags override file values")
      ->envname("PSEUDOQE_CONFIG");
  bool show_config = false;
  app.add_flag("--show-config", show_config,
               "print the effective configuration and exit");

  pseudoqe::cli::register_data_commands(app);
  pseudoqe::cli::register_model_commands(app);
  pseudoqe::cli::register_eval_commands(app);

  try {
    app.parse(argc, argv);
    if (show_config) {
      std::cout << app.config_to_str(true, true);
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << app.help();
      return 1;
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage problems are validation errors
  } catch (const pseudoqe::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const pseudoqe::SamplerError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const pseudoqe::DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
