#include <cstdio>
int main() { std::puts("vtcap placeholder"); return 0; }
