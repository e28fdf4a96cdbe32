#include <iostream>

int main() {
    long long n;
    std::cin >> n;
    long long s = 0;
    for (long long i = 1; i < n; ++i) s += i;
    std::cout << s << '\n';
}
