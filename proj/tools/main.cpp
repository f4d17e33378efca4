#include <iostream>
#include <string>
#include <vector>

#include "cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  auto r = specinv::cli::run(args);
  std::cout << r.report.dump(2) << std::endl;
  if (r.report.contains("error")) std::cerr << "specinv: " << r.report["error"].get<std::string>() << std::endl;
  return r.exit_code;
}
