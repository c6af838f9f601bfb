#include "hiddenout/cli.hpp"

int main(int argc, char** argv) { return hiddenout::cli::main(argc, argv); }
