class Solution {
public:
    int searchInsert(vector<int>& nums, int target) {
        throw runtime_error("not implemented");
    }
};
