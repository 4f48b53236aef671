#include <string>
#include <vector>

#include "georf/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return georf::cli::run(std::move(args));
}
