#include "isomech/cli.hpp"

int main(int argc, char** argv) { return isomech::run_cli(argc, argv); }
