#include "saddlelab/lab.hpp"

int main(int argc, char** argv) { return saddlelab::lab::run_cli(argc, argv); }
