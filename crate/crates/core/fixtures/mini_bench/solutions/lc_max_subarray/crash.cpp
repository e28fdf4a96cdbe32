class Solution {
public:
    int maxSubArray(vector<int>& nums) {
        throw runtime_error("not implemented");
    }
};
