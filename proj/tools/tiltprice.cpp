#include "cli_app.hpp"

int main(int argc, char** argv)
{
    return tiltprice::cli::main(argc, argv);
}
