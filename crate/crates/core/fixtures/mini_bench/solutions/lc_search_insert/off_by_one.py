class Solution:
    def searchInsert(self, nums: List[int], target: int) -> int:
        for i in range(len(nums) - 1):
            if nums[i] >= target:
                return i
        return len(nums) - 1
