#include "bridgekit/cli.hpp"

int main(int argc, char** argv) { return bridgekit::run_cli(argc, argv); }
