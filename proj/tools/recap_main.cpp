#include "recap/cli.hpp"

int main(int argc, char** argv) { return recap::run_cli(argc, argv); }
