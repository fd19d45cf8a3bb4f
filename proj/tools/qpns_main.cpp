#include "qpns/cli.hpp"

int main(int argc, char** argv) { return qpns::cli::main(argc, argv); }
