#include <chrono>
#include <thread>

class Solution {
public:
    int maxSubArray(vector<int>& nums) {
        while (true) this_thread::sleep_for(chrono::seconds(1));
    }
};
