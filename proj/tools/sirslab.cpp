#include <iostream>
#include <string>
#include <vector>

#include "sirs/app/commands.hpp"

int main(int argc, char** argv) {
  return sirs::app::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
