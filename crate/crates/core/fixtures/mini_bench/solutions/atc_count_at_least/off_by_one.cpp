#include <iostream>

int main() {
    int n;
    long long x;
    std::cin >> n >> x;
    int c = 0;
    for (int i = 0; i < n; ++i) {
        long long v;
        std::cin >> v;
        if (v > x) ++c;
    }
    std::cout << c << '\n';
}
