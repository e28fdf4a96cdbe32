import time


class Solution:
    def maxSubArray(self, nums: List[int]) -> int:
        while True:
            time.sleep(1)
