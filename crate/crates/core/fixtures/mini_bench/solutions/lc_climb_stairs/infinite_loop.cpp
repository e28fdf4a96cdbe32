#include <chrono>
#include <thread>

class Solution {
public:
    int climbStairs(int n) {
        while (true) this_thread::sleep_for(chrono::seconds(1));
    }
};
