#include "cli.hpp"

int main(int argc, char** argv) { return fraflow::cli::run(argc, argv); }
