#include "algae/runner.hpp"

int main(int argc, char** argv) { return algae::cli_main(argc, argv); }
