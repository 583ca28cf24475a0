#include "coneroute/cli.hpp"

int main(int argc, char** argv) { return coneroute::run_cli(argc, argv); }
