import time


class Solution:
    def searchInsert(self, nums: List[int], target: int) -> int:
        while True:
            time.sleep(1)
