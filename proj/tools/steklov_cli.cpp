#include <cstdio>
int main() { std::puts("steklov CLI placeholder"); return 0; }
