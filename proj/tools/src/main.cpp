#include "dntk/cli.hpp"

int main(int argc, char** argv) { return dntk::cli::run(argc, argv); }
