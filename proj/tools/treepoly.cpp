#include "treepoly/cli.hpp"

int main(int argc, char** argv) { return treepoly::cli::main(argc, argv); }
