#include "tiltrotor/cli.hpp"

int main(int argc, char** argv) { return tiltrotor::run_cli(argc, argv); }
