#include "graphdec/cli.hpp"

int main(int argc, char** argv) { return graphdec::run_cli(argc, argv); }
